//! Steady states by null-space solve and by implicit time stepping.

use faer::prelude::*;
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use super::fock::{moment, trace};
use super::liouvillian::{from_coordinates, from_vec, to_vec, LiouvillianMatrix};
use crate::error::{Error, Result};

/// Largest tolerated population of the top Fock level.
pub const TOP_LEVEL_LIMIT: f64 = 1e-8;
/// Pivot ratio below which the trace-augmented generator counts as singular.
const PIVOT_LIMIT: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: Mat<C64>,
    /// `max |L ρ|`.
    pub residual: f64,
    pub top_population: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityObservables {
    pub n: f64,
    pub g2: f64,
    pub b_mean: C64,
}

/// Unique steady state from the generator with one population equation
/// replaced by the trace condition. A second null vector of `L` survives
/// the replacement and shows up as a vanishing pivot.
pub fn steady_state(l: &LiouvillianMatrix) -> Result<SteadyState> {
    if l.is_undriven() {
        return finish(l, vacuum(l.hilbert_dim()));
    }
    let n = l.hilbert_dim();
    let dim = l.dim();
    let mut m = l.real_form();
    for c in 0..dim {
        m[(0, c)] = 0.0;
    }
    for i in 0..n {
        m[(0, i + i * n)] = 1.0;
    }
    // column-pivoted QR is rank revealing: |R_ii| is nonincreasing
    let qr = m.col_piv_qr();
    let r = qr.R();
    let pivots: Vec<f64> = (0..dim).map(|i| r[(i, i)].abs()).collect();
    let big = pivots.iter().cloned().fold(0.0, f64::max);
    let small = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(small > PIVOT_LIMIT * big) {
        return Err(Error::DegenerateSteadyState {
            pivot_ratio: small / big,
        });
    }
    let mut rhs = Mat::<f64>::zeros(dim, 1);
    rhs[(0, 0)] = 1.0;
    qr.solve_in_place(rhs.as_mut());
    finish(l, from_real_coords(&rhs, n))
}

/// Implicit-Euler relaxation from the vacuum with steps growing tenfold,
/// stopping once `Lρ` vanishes to `1e-10` and iterates stop moving.
pub fn steady_state_ode(l: &LiouvillianMatrix, t_final: f64) -> Result<SteadyState> {
    let n = l.hilbert_dim();
    let dim = l.dim();
    if l.is_undriven() {
        return finish(l, vacuum(n));
    }
    let real = l.real_form();
    let mut v = Mat::<f64>::zeros(dim, 1);
    v[(0, 0)] = 1.0;
    let mut t = 0.0;
    let mut dt: f64 = 0.1;
    let mut residual = f64::INFINITY;
    while t < t_final {
        let step = dt.min(t_final - t);
        let a = Mat::<f64>::from_fn(dim, dim, |r, c| {
            (if r == c { 1.0 } else { 0.0 }) - step * real[(r, c)]
        });
        let lu = a.partial_piv_lu();
        for _ in 0..6 {
            let mut next = v.clone();
            lu.solve_in_place(next.as_mut());
            let tr: f64 = (0..n).map(|i| next[(i + i * n, 0)]).sum();
            next /= tr;
            let change = (&next - &v).norm_max();
            v = next;
            t += step;
            residual = (&real * &v).norm_max();
            if residual < 1e-10 && change < 1e-13 {
                return finish(l, from_real_coords(&v, n));
            }
            if t >= t_final {
                break;
            }
        }
        dt *= 10.0;
    }
    Err(Error::NotConverged { residual, time: t })
}

/// `n`, `g²(0)` and `⟨b⟩` of a steady state.
pub fn cavity_observables(state: &SteadyState) -> Result<CavityObservables> {
    let n = moment(&state.rho, 1, 1).re;
    let b_mean = moment(&state.rho, 0, 1);
    if n <= 1e-14 {
        return Err(Error::UndefinedG2("cavity is empty"));
    }
    let g2 = moment(&state.rho, 2, 2).re / (n * n);
    Ok(CavityObservables { n, g2, b_mean })
}

/// `½ Σ |eig(ρ₁ − ρ₂)|`.
pub fn trace_distance(a: &Mat<C64>, b: &Mat<C64>) -> Result<f64> {
    let diff = a - b;
    let ev = diff
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::EigenSolverFailure(format!("{e:?}")))?;
    Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
}

fn vacuum(n: usize) -> Mat<C64> {
    let mut rho = Mat::<C64>::zeros(n, n);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    rho
}

fn from_real_coords(v: &Mat<f64>, n: usize) -> Mat<C64> {
    let w: Vec<C64> = (0..n * n).map(|i| C64::new(v[(i, 0)], 0.0)).collect();
    from_vec(&from_coordinates(&w, n), n)
}

fn finish(l: &LiouvillianMatrix, rho: Mat<C64>) -> Result<SteadyState> {
    let n = rho.nrows();
    // exact Hermitian part, unit trace
    let tr = trace(&rho).re;
    let rho = Mat::from_fn(n, n, |i, j| 0.5 * (rho[(i, j)] + rho[(j, i)].conj()) / tr);
    let residual = l
        .apply_vec(&to_vec(&rho))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let top_population = rho[(n - 1, n - 1)].re;
    let min_eigenvalue = rho
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::EigenSolverFailure(format!("{e:?}")))?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if top_population > TOP_LEVEL_LIMIT {
        return Err(Error::CutoffTooSmall {
            cutoff: l.cutoff,
            population: top_population,
        });
    }
    Ok(SteadyState {
        rho,
        residual,
        top_population,
        min_eigenvalue,
    })
}
