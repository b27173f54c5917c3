//! Real-space two-photon wavefunction of the transmitted field.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::series::{sum_shells, LnFactorial, SeriesBase};
use super::{
    correlated_part_quadrature, t_matrix, Evaluation, Method, SeriesDiagnostics,
};
use crate::error::{Error, Result};
use crate::model::{mode_phases, Direction, SystemParams};
use crate::scattering_one::scatter_single;

/// Displacements closer to zero than this (relative to their scale) take the
/// half step weight.
const STEP_SNAP: f64 = 1e-13;

/// Series for the correlated part
/// `F_t(X₁,X₂) = (1/π) ∫ dp e^{ipX₁} e^{i(2k̄−p)X₂} η*_p η*_{2k̄−p} G(p) G(2k̄−p)`.
pub fn correlated_part_series(
    params: &SystemParams,
    k_bar: f64,
    x1: f64,
    x2: f64,
) -> Result<Evaluation<C64>> {
    let base = SeriesBase::new(params, k_bar);
    let lf = LnFactorial::new(params.controls.series_max_order + 1);
    let d = params.d;
    let theta = params.theta_r(k_bar);
    let a = C64::cis(-2.0 * params.phi) + C64::cis(-2.0 * theta);
    let b = C64::cis(-params.phi - theta);

    // Θ(Y)-weighted term at Y = x + j d.
    let step = |m: usize, n: usize, x: f64, j: i64| -> (C64, f64) {
        let y = x + j as f64 * d;
        let scale = x.abs() + (j.unsigned_abs() as f64) * d;
        if y.abs() <= STEP_SNAP * scale || y == 0.0 {
            let (v, p) = base.term(&lf, m, n, 0.0);
            (0.5 * v, 0.5 * p)
        } else if y < 0.0 {
            (C64::new(0.0, 0.0), 0.0)
        } else {
            base.term(&lf, m, n, y)
        }
    };
    // shells with |m − n| d < |X₁ − X₂| only see the far tail of e^{−2γY}
    let reach = if d > 0.0 { ((x1 - x2).abs() / d).ceil() + 2.0 } else { 0.0 };
    if reach > params.controls.series_max_order as f64 {
        return Err(Error::OrderOverflow {
            order: reach as usize,
            max: params.controls.series_max_order,
        });
    }
    let sum = sum_shells(params, &base, reach as usize, |s| {
        let mut v = C64::new(0.0, 0.0);
        let mut peak = 0.0f64;
        for n in 0..=s {
            let m = s - n;
            let j = m as i64 - n as i64;
            for x in [x1 - x2, x2 - x1] {
                let (t0, p0) = step(m, n, x, j);
                let (tp, pp) = step(m, n, x, j + 1);
                let (tm, pm) = step(m, n, x, j - 1);
                v += a * t0 + b * (tp + tm);
                peak = peak.max(p0).max(pp).max(pm);
            }
        }
        (v, peak)
    })?;
    let prefactor = C64::new(0.0, -1.0) * C64::cis(k_bar * (x1 + x2)) / base.big_k;
    Ok(Evaluation {
        value: prefactor * sum.value,
        diag: SeriesDiagnostics {
            orders_used: sum.orders_used,
            truncation_error_estimate: sum.truncation_error_estimate,
            converged: true,
            backend: super::Backend::Series,
            cancellation_ratio: sum.cancellation,
        },
    })
}

/// `F_t` by the selected method.
pub fn correlated_part(
    params: &SystemParams,
    k_bar: f64,
    x1: f64,
    x2: f64,
    method: Method,
) -> Result<Evaluation<C64>> {
    let quad = || -> Result<Evaluation<C64>> {
        Ok(Evaluation {
            value: correlated_part_quadrature(params, k_bar, x1, x2)?,
            diag: SeriesDiagnostics::quadrature(params),
        })
    };
    match method {
        Method::Series => correlated_part_series(params, k_bar, x1, x2),
        Method::Quadrature => quad(),
        Method::Auto => match correlated_part_series(params, k_bar, x1, x2) {
            Err(Error::SeriesDiverged { .. }) | Err(Error::OrderOverflow { .. }) => quad(),
            other => other,
        },
    }
}

/// Transmitted two-photon wavefunction for right-moving inputs `k1`, `k2`:
/// plane-wave part plus `−i(γ²/2π) η η T_S G G F_t`. Symmetric in `x1 ↔ x2`.
pub fn wavefunction_t(
    params: &SystemParams,
    k1: f64,
    k2: f64,
    x1: f64,
    x2: f64,
) -> Result<Evaluation<C64>> {
    let a1 = scatter_single(params, k1, Direction::R)?;
    let a2 = scatter_single(params, k2, Direction::R)?;
    let plane = a1.t * a2.t / (2.0 * PI)
        * (C64::cis(k2 * x1 + k1 * x2) + C64::cis(k1 * x1 + k2 * x2));
    if params.u == 0.0 {
        return Ok(Evaluation {
            value: plane,
            diag: SeriesDiagnostics::exact(),
        });
    }
    let ts = t_matrix(params, k1, k2)?;
    let ft = correlated_part(params, 0.5 * (k1 + k2), x1, x2, Method::Auto)?;
    let gamma = params.gamma;
    let eta1 = mode_phases(params, Direction::R, k1).eta;
    let eta2 = mode_phases(params, Direction::R, k2).eta;
    let correlated = C64::new(0.0, -gamma * gamma / (2.0 * PI))
        * eta1
        * eta2
        * ts.value
        * a1.green
        * a2.green
        * ft.value;
    let mut diag = ft.diag;
    if ts.diag.backend != super::Backend::Series {
        diag.backend = ts.diag.backend;
    }
    Ok(Evaluation {
        value: plane + correlated,
        diag,
    })
}
