//! Two-photon scattering: Green convolution, T-matrix, fluorescence density,
//! real-space wavefunction and transmitted g²(τ).
//!
//! Closed-form series are the primary backend. Adaptive quadrature of the
//! same integrals is the fallback when a series diverges or loses precision
//! to cancellation, and an FFT route serves as an independent grid oracle.

mod fft;
mod quadrature;
mod series;
mod wavefunction;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mode_phases, Direction, SystemParams};
use crate::scattering_one::{green, scatter_single};

pub use fft::{wavefunction_fft, FftWavefunction, PositionGrid};
pub use quadrature::{correlated_part_quadrature, green_convolution_quadrature, integrate_adaptive};
pub use series::{c_mnl, f_mn, CANCELLATION_LIMIT};
pub use wavefunction::{correlated_part, correlated_part_series, wavefunction_t};

/// Which evaluator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Series,
    Quadrature,
    Fft,
}

/// Evaluator selection. `Auto` tries the series and falls back to quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    Series,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    pub orders_used: usize,
    /// Relative for the series, absolute for quadrature.
    pub truncation_error_estimate: f64,
    pub converged: bool,
    pub backend: Backend,
    /// Largest term over the magnitude of the sum.
    pub cancellation_ratio: f64,
}

impl SeriesDiagnostics {
    pub(crate) fn exact() -> Self {
        SeriesDiagnostics {
            orders_used: 0,
            truncation_error_estimate: 0.0,
            converged: true,
            backend: Backend::Series,
            cancellation_ratio: 1.0,
        }
    }

    pub(crate) fn quadrature(params: &SystemParams) -> Self {
        SeriesDiagnostics {
            orders_used: 0,
            truncation_error_estimate: params.controls.quadrature_abs_tol,
            converged: true,
            backend: Backend::Quadrature,
            cancellation_ratio: 1.0,
        }
    }

    fn from_sum(s: &series::ShellSum) -> Self {
        SeriesDiagnostics {
            orders_used: s.orders_used,
            truncation_error_estimate: s.truncation_error_estimate,
            converged: true,
            backend: Backend::Series,
            cancellation_ratio: s.cancellation,
        }
    }
}

/// A value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    pub diag: SeriesDiagnostics,
}

/// `∫ dω G(ω) G(2k̄ − ω)` from the shell series
/// `(2π/(ik̄ − 2γ)) Σ_{m≥n} Θ(m−n) F_mn(k̄)` with `Θ(0) = 1/2`.
pub fn green_convolution(params: &SystemParams, k_bar: f64) -> Result<Evaluation<C64>> {
    let base = series::SeriesBase::new(params, k_bar);
    let lf = series::LnFactorial::new(params.controls.series_max_order + 1);
    let d = params.d;
    let sum = series::sum_shells(params, &base, 0, |s| {
        let mut v = C64::new(0.0, 0.0);
        let mut peak = 0.0f64;
        for n in 0..=s / 2 {
            let m = s - n;
            let (t, p) = base.term(&lf, m, n, (m - n) as f64 * d);
            v += if m == n { 0.5 * t } else { t };
            peak = peak.max(p);
        }
        (v, peak)
    })?;
    Ok(Evaluation {
        value: C64::new(0.0, -2.0 * PI) / base.big_k * sum.value,
        diag: SeriesDiagnostics::from_sum(&sum),
    })
}

pub(crate) fn green_convolution_with(
    params: &SystemParams,
    k_bar: f64,
    method: Method,
) -> Result<Evaluation<C64>> {
    match method {
        Method::Series => green_convolution(params, k_bar),
        Method::Quadrature => Ok(Evaluation {
            value: green_convolution_quadrature(params, k_bar)?,
            diag: SeriesDiagnostics::quadrature(params),
        }),
        Method::Auto => match green_convolution(params, k_bar) {
            Err(Error::SeriesDiverged { .. }) | Err(Error::OrderOverflow { .. }) => {
                green_convolution_with(params, k_bar, Method::Quadrature)
            }
            other => other,
        },
    }
}

/// `T_S = U / (1 − i(U/2π) ∫ G(ω) G(k₁+k₂−ω) dω)`.
pub fn t_matrix(params: &SystemParams, k1: f64, k2: f64) -> Result<Evaluation<C64>> {
    t_matrix_with(params, k1, k2, Method::Auto)
}

pub fn t_matrix_with(params: &SystemParams, k1: f64, k2: f64, method: Method) -> Result<Evaluation<C64>> {
    let u = params.u;
    if u == 0.0 {
        return Ok(Evaluation {
            value: C64::new(0.0, 0.0),
            diag: SeriesDiagnostics::exact(),
        });
    }
    let conv = green_convolution_with(params, 0.5 * (k1 + k2), method)?;
    let value = u / (1.0 - C64::new(0.0, u / (2.0 * PI)) * conv.value);
    Ok(Evaluation {
        value,
        diag: conv.diag,
    })
}

/// Two-photon S-matrix for right-moving inputs `k1`, `k2`.
#[derive(Debug, Clone)]
pub struct TwoPhotonAmplitude {
    pub k1: f64,
    pub k2: f64,
    /// Coefficient of `δ(k₁−p₁)δ(k₂−p₂)` once the exchange term is folded in:
    /// `t(k₁)t(k₂)`, doubled when `k₁ = k₂`.
    pub elastic_coeff: C64,
    pub t_s: C64,
    pub diag: SeriesDiagnostics,
    params: SystemParams,
    /// `(γ²/π) T_S G(k₁) G(k₂) η_{R,k₁} η_{R,k₂}`.
    vertex: C64,
}

impl TwoPhotonAmplitude {
    /// Fluorescence density `Γ` at output momentum `p1`, with `p2 = k1 + k2 − p1`.
    pub fn fluorescence(&self, p1: f64) -> Result<C64> {
        if self.vertex == C64::new(0.0, 0.0) {
            return Ok(self.vertex);
        }
        let p2 = self.k1 + self.k2 - p1;
        let p = &self.params;
        let e1 = mode_phases(p, Direction::R, p1).eta;
        let e2 = mode_phases(p, Direction::R, p2).eta;
        Ok(self.vertex * e1.conj() * e2.conj() * green(p, p1)? * green(p, p2)?)
    }
}

pub fn two_photon_s(params: &SystemParams, k1: f64, k2: f64) -> Result<TwoPhotonAmplitude> {
    let t1 = scatter_single(params, k1, Direction::R)?;
    let t2 = scatter_single(params, k2, Direction::R)?;
    let mut elastic_coeff = t1.t * t2.t;
    if k1 == k2 {
        elastic_coeff *= 2.0;
    }
    let ts = t_matrix(params, k1, k2)?;
    let gamma = params.gamma;
    let vertex = gamma * gamma / PI
        * ts.value
        * t1.green
        * t2.green
        * mode_phases(params, Direction::R, k1).eta
        * mode_phases(params, Direction::R, k2).eta;
    Ok(TwoPhotonAmplitude {
        k1,
        k2,
        elastic_coeff,
        t_s: ts.value,
        diag: ts.diag,
        params: params.clone(),
        vertex,
    })
}

/// Transmitted `g²(τ) = |w_t(τ, 0)|² / (|t(k_i)|²/π)²` for two photons at `k_i`.
pub fn g2_transmitted(params: &SystemParams, k_i: f64, tau: f64) -> Result<f64> {
    Ok(g2_transmitted_eval(params, k_i, tau)?.value)
}

pub fn g2_transmitted_eval(params: &SystemParams, k_i: f64, tau: f64) -> Result<Evaluation<f64>> {
    let t = scatter_single(params, k_i, Direction::R)?.t;
    if t.norm() < 1e-10 {
        return Err(Error::UndefinedG2("transmission amplitude vanishes"));
    }
    let w = wavefunction_t(params, k_i, k_i, tau, 0.0)?;
    let w_inf = t.norm_sqr() / PI;
    Ok(Evaluation {
        value: w.value.norm_sqr() / (w_inf * w_inf),
        diag: w.diag,
    })
}
