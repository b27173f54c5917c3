//! Hamiltonian and Liouvillian in the frame rotating at the drive frequency.
//!
//! `∂ρ/∂t = −i[H, ρ] + 2γ(2bρb† − {b†b, ρ})`, with
//! `H = −k_i b†b + (U/2) b†²b² + Ω b† + Ω* b`.
//!
//! Vectorization is column-stacking, `vec(AXB) = (Bᵀ ⊗ A) vec X`. For the
//! dense solvers the generator is also expressed in the orthonormal Hermitian
//! basis `{E_ii, (E_ij+E_ji)/√2, i(E_ij−E_ji)/√2}`, where it is a real matrix.

use std::f64::consts::SQRT_2;

use faer::Mat;
use num_complex::Complex64 as C64;

use super::fock::FockOperator;
use super::semiclassical::default_cutoff;
use crate::model::{DriveConfig, SystemParams};

/// Hamiltonian at the configured or semiclassically chosen cutoff.
pub fn build_hamiltonian(params: &SystemParams, drive: &DriveConfig) -> FockOperator {
    build_hamiltonian_with_cutoff(params, drive, default_cutoff(params, drive))
}

pub fn build_hamiltonian_with_cutoff(params: &SystemParams, drive: &DriveConfig, cutoff: usize) -> FockOperator {
    let omega = drive.rabi(params);
    let dim = cutoff + 1;
    let diag = |n: usize| {
        let nf = n as f64;
        -drive.k_i * nf + 0.5 * params.u * nf * (nf - 1.0)
    };
    FockOperator {
        matrix: Mat::from_fn(dim, dim, |i, j| {
            if i == j {
                C64::new(diag(i), 0.0)
            } else if i == j + 1 {
                omega * (i as f64).sqrt()
            } else if j == i + 1 {
                omega.conj() * (j as f64).sqrt()
            } else {
                C64::new(0.0, 0.0)
            }
        }),
        cutoff,
    }
}

/// Generator of the master equation, kept in operator form; dense matrices
/// are built on request.
#[derive(Debug, Clone)]
pub struct LiouvillianMatrix {
    pub cutoff: usize,
    pub gamma: f64,
    /// Diagonal of `H`.
    energies: Vec<f64>,
    /// `H[n+1, n] = Ω √(n+1)`.
    drive: Vec<C64>,
}

/// Liouvillian at the configured or semiclassically chosen cutoff.
pub fn build_liouvillian(params: &SystemParams, drive: &DriveConfig) -> LiouvillianMatrix {
    build_liouvillian_with_cutoff(params, drive, default_cutoff(params, drive))
}

pub fn build_liouvillian_with_cutoff(
    params: &SystemParams,
    drive: &DriveConfig,
    cutoff: usize,
) -> LiouvillianMatrix {
    let h = build_hamiltonian_with_cutoff(params, drive, cutoff);
    LiouvillianMatrix {
        cutoff,
        gamma: params.gamma,
        energies: (0..=cutoff).map(|n| h.matrix[(n, n)].re).collect(),
        drive: (0..cutoff).map(|n| h.matrix[(n + 1, n)]).collect(),
    }
}

impl LiouvillianMatrix {
    /// Hilbert-space dimension `N + 1`.
    pub fn hilbert_dim(&self) -> usize {
        self.cutoff + 1
    }

    /// Superoperator dimension `(N + 1)²`.
    pub fn dim(&self) -> usize {
        self.hilbert_dim().pow(2)
    }

    /// `L(X)` for an arbitrary operator `X`, column-major `D×D` slices.
    pub fn apply_slice(&self, x: &[C64], out: &mut [C64]) {
        let n = self.hilbert_dim();
        let g = self.gamma;
        let e = &self.energies;
        let w = &self.drive;
        let at = |i: usize, j: usize| x[i + j * n];
        let minus_i = C64::new(0.0, -1.0);
        for j in 0..n {
            for i in 0..n {
                let xij = at(i, j);
                // (HX − XH)
                let mut comm = (e[i] - e[j]) * xij;
                if i > 0 {
                    comm += w[i - 1] * at(i - 1, j);
                }
                if i + 1 < n {
                    comm += w[i].conj() * at(i + 1, j);
                }
                if j > 0 {
                    comm -= at(i, j - 1) * w[j - 1].conj();
                }
                if j + 1 < n {
                    comm -= at(i, j + 1) * w[j];
                }
                let mut diss = -((i + j) as f64) * xij;
                if i + 1 < n && j + 1 < n {
                    diss += 2.0 * (((i + 1) * (j + 1)) as f64).sqrt() * at(i + 1, j + 1);
                }
                out[i + j * n] = minus_i * comm + 2.0 * g * diss;
            }
        }
    }

    /// True when the drive vanishes, so the vacuum is the steady state.
    pub fn is_undriven(&self) -> bool {
        self.drive.iter().all(|w| *w == C64::new(0.0, 0.0))
    }

    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        self.apply_slice(x, &mut out);
        out
    }

    pub fn apply(&self, x: &Mat<C64>) -> Mat<C64> {
        let n = self.hilbert_dim();
        let xs = to_vec(x);
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        self.apply_slice(&xs, &mut out);
        from_vec(&out, n)
    }

    /// Column-stacked complex matrix of the generator.
    pub fn dense(&self) -> Mat<C64> {
        let dim = self.dim();
        let mut m = Mat::<C64>::zeros(dim, dim);
        let mut unit = vec![C64::new(0.0, 0.0); dim];
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for c in 0..dim {
            unit[c] = C64::new(1.0, 0.0);
            self.apply_slice(&unit, &mut col);
            unit[c] = C64::new(0.0, 0.0);
            for r in 0..dim {
                m[(r, c)] = col[r];
            }
        }
        m
    }

    /// The generator in the Hermitian basis; real because `L` preserves
    /// Hermiticity.
    pub fn real_form(&self) -> Mat<f64> {
        let n = self.hilbert_dim();
        let dim = self.dim();
        let mut m = Mat::<f64>::zeros(dim, dim);
        let mut basis = vec![C64::new(0.0, 0.0); dim];
        let mut image = vec![C64::new(0.0, 0.0); dim];
        for c in 0..dim {
            let (i, j) = (c % n, c / n);
            set_basis(&mut basis, n, i, j, 1.0);
            self.apply_slice(&basis, &mut image);
            set_basis(&mut basis, n, i, j, 0.0);
            let coords = coordinates(&image, n);
            for r in 0..dim {
                m[(r, c)] = coords[r].re;
            }
        }
        m
    }
}

fn set_basis(buf: &mut [C64], n: usize, i: usize, j: usize, s: f64) {
    let r = s / SQRT_2;
    match i.cmp(&j) {
        std::cmp::Ordering::Equal => buf[i + j * n] = C64::new(s, 0.0),
        std::cmp::Ordering::Less => {
            buf[i + j * n] = C64::new(r, 0.0);
            buf[j + i * n] = C64::new(r, 0.0);
        }
        std::cmp::Ordering::Greater => {
            // position (i, j) with i > j holds the antisymmetric element of (j, i)
            buf[j + i * n] = C64::new(0.0, r);
            buf[i + j * n] = C64::new(0.0, -r);
        }
    }
}

/// Coordinates `Tr(B_a X)` of an operator in the Hermitian basis. Real for
/// Hermitian `X`.
pub fn coordinates(x: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    let minus_i = C64::new(0.0, -1.0);
    for j in 0..n {
        for i in 0..n {
            let a = x[i + j * n];
            out[i + j * n] = match i.cmp(&j) {
                std::cmp::Ordering::Equal => a,
                std::cmp::Ordering::Less => (a + x[j + i * n]) / SQRT_2,
                std::cmp::Ordering::Greater => minus_i * (x[j + i * n] - a) / SQRT_2,
            };
        }
    }
    out
}

/// Inverse of [`coordinates`].
pub fn from_coordinates(w: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    let i_unit = C64::new(0.0, 1.0);
    for j in 0..n {
        for i in 0..n {
            out[i + j * n] = match i.cmp(&j) {
                std::cmp::Ordering::Equal => w[i + j * n],
                // X_ij = (w_S + i w_A)/√2 with w_S at (i, j), w_A at (j, i)
                std::cmp::Ordering::Less => (w[i + j * n] + i_unit * w[j + i * n]) / SQRT_2,
                std::cmp::Ordering::Greater => (w[j + i * n] - i_unit * w[i + j * n]) / SQRT_2,
            };
        }
    }
    out
}

pub(crate) fn to_vec(x: &Mat<C64>) -> Vec<C64> {
    let n = x.nrows();
    let mut v = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            v.push(x[(i, j)]);
        }
    }
    v
}

pub(crate) fn from_vec(v: &[C64], n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| v[i + j * n])
}
