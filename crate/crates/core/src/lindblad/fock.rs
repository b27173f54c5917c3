//! Truncated Fock-space operators.

use faer::Mat;
use num_complex::Complex64 as C64;

/// Dense operator on the Fock space `{|0⟩, ..., |N⟩}`.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub matrix: Mat<C64>,
    pub cutoff: usize,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    /// `b` with `b[n−1, n] = √n`.
    pub fn annihilation(cutoff: usize) -> Self {
        FockOperator {
            matrix: Mat::from_fn(cutoff + 1, cutoff + 1, |i, j| {
                if j == i + 1 {
                    C64::new((j as f64).sqrt(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            cutoff,
        }
    }

    pub fn number(cutoff: usize) -> Self {
        FockOperator {
            matrix: Mat::from_fn(cutoff + 1, cutoff + 1, |i, j| {
                C64::new(if i == j { i as f64 } else { 0.0 }, 0.0)
            }),
            cutoff,
        }
    }

    pub fn adjoint(&self) -> Self {
        FockOperator {
            matrix: self.matrix.adjoint().to_owned(),
            cutoff: self.cutoff,
        }
    }

    /// Largest `|A − A†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }
}

pub(crate) fn hermiticity_defect(a: &Mat<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn trace(a: &Mat<C64>) -> C64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// `b X`.
pub(crate) fn lower(x: &Mat<C64>) -> Mat<C64> {
    let n = x.nrows();
    Mat::from_fn(n, n, |i, j| {
        if i + 1 < n {
            x[(i + 1, j)] * ((i + 1) as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `X b†`.
pub(crate) fn lower_right(x: &Mat<C64>) -> Mat<C64> {
    let n = x.nrows();
    Mat::from_fn(n, n, |i, j| {
        if j + 1 < n {
            x[(i, j + 1)] * ((j + 1) as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `b† X`.
pub(crate) fn raise(x: &Mat<C64>) -> Mat<C64> {
    let n = x.nrows();
    Mat::from_fn(n, n, |i, j| {
        if i > 0 {
            x[(i - 1, j)] * (i as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `Tr(b†^p b^q X)`.
pub(crate) fn moment(x: &Mat<C64>, p: usize, q: usize) -> C64 {
    let mut y = x.clone();
    for _ in 0..q {
        y = lower(&y);
    }
    for _ in 0..p {
        y = raise(&y);
    }
    trace(&y)
}
