//! Action of `exp(Lτ)` on operators.
//!
//! Short times use adaptive Dormand–Prince 5(4) on the operator form; long
//! times use the eigendecomposition of the generator.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;

use super::liouvillian::{coordinates, from_coordinates, from_vec, to_vec, LiouvillianMatrix};
use super::spectrum::ZERO_EIGENVALUE;
use crate::error::{Error, Result};

/// `γτ` up to which propagation is done by time stepping.
pub const ODE_HORIZON: f64 = 100.0;

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// `exp(Lτ) X` by adaptive Dormand–Prince stepping.
pub fn propagate_ode(l: &LiouvillianMatrix, x: &Mat<C64>, tau: f64, rel_tol: f64) -> Result<Mat<C64>> {
    let n = x.nrows();
    let mut y = to_vec(x);
    if tau == 0.0 {
        return Ok(x.clone());
    }
    let len = y.len();
    let scale0 = y.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let abs_tol = rel_tol * 1e-4 * scale0;
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); len]; 7];
    let mut stage = vec![C64::new(0.0, 0.0); len];
    l.apply_slice(&y, &mut k[0]);
    let mut t = 0.0;
    let mut h = (0.01 / (1.0 + l.cutoff as f64)).min(tau);
    let mut steps = 0usize;
    while t < tau {
        if steps > 50_000_000 {
            return Err(Error::NotConverged {
                residual: f64::NAN,
                time: t,
            });
        }
        h = h.min(tau - t);
        for s in 0..6 {
            for i in 0..len {
                let mut acc = y[i];
                for (r, kr) in k.iter().enumerate().take(s + 1) {
                    let a = A[s][r];
                    if a != 0.0 {
                        acc += kr[i] * (h * a);
                    }
                }
                stage[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s + 1);
            l.apply_slice(&stage, &mut tail[0]);
        }
        // stage now holds the fifth-order solution; k[6] = f(stage)
        let mut err = 0.0f64;
        for i in 0..len {
            let mut e = C64::new(0.0, 0.0);
            for (r, kr) in k.iter().enumerate() {
                if E[r] != 0.0 {
                    e += kr[i] * E[r];
                }
            }
            let sc = abs_tol + rel_tol * y[i].norm().max(stage[i].norm());
            err = err.max((e * h).norm() / sc);
        }
        steps += 1;
        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut stage);
            let last = k.pop().unwrap();
            k.insert(0, last);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(from_vec(&y, n))
}

/// Eigendecomposition `L = V Λ V⁻¹` in the Hermitian basis.
pub struct SpectralPropagator {
    n: usize,
    values: Vec<C64>,
    vectors: Mat<C64>,
    lu: PartialPivLu<C64>,
}

impl SpectralPropagator {
    pub fn new(l: &LiouvillianMatrix) -> Result<Self> {
        let eig = l
            .real_form()
            .eigen()
            .map_err(|e| Error::EigenSolverFailure(format!("{e:?}")))?;
        let vectors = eig.U().to_owned();
        // trace preservation makes the stationary eigenvalue exactly zero;
        // leaving its rounding in place gives a drift linear in τ
        let values = (0..vectors.ncols())
            .map(|i| eig.S()[i])
            .map(|z| if z.norm() < ZERO_EIGENVALUE { C64::new(0.0, 0.0) } else { z })
            .collect();
        let lu = vectors.partial_piv_lu();
        Ok(SpectralPropagator {
            n: l.hilbert_dim(),
            values,
            vectors,
            lu,
        })
    }

    pub fn apply(&self, x: &Mat<C64>, tau: f64) -> Mat<C64> {
        let w = coordinates(&to_vec(x), self.n);
        let mut y = Mat::from_fn(w.len(), 1, |i, _| w[i]);
        self.lu.solve_in_place(y.as_mut());
        for (i, lam) in self.values.iter().enumerate() {
            y[(i, 0)] *= (lam * tau).exp();
        }
        let out = &self.vectors * &y;
        let coords: Vec<C64> = (0..out.nrows()).map(|i| out[(i, 0)]).collect();
        from_vec(&from_coordinates(&coords, self.n), self.n)
    }
}
