//! Grid oracle for the transmitted wavefunction.
//!
//! The fluorescence density along the energy-conserving line is sampled on a
//! uniform momentum grid and Fourier transformed. The slowly decaying part
//! `η* η* G₀ G₀`, with `G₀(p) = 1/(p + 2iγ)`, is subtracted first and added
//! back in closed form, leaving a remainder that falls off like `1/p³`.
//! `T_S` comes from quadrature, so nothing here shares code with the series.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::quadrature::{green_convolution_quadrature, resonance_width, resonance_window};
use crate::error::{Error, Result};
use crate::model::{mode_phases, Direction, SystemParams};
use crate::scattering_one::{green_unchecked, scatter_single};

/// Half-width of the sampled momentum window around `k̄`.
const WINDOW: f64 = 2000.0;
/// Largest transform the oracle will attempt.
pub const MAX_POINTS: usize = 1 << 24;

/// Uniform grid `X₁ = x1_start + j·x1_step`, `j < count`, at fixed `X₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionGrid {
    pub x1_start: f64,
    pub x1_step: f64,
    pub count: usize,
    pub x2: f64,
}

impl PositionGrid {
    pub fn x1(&self, j: usize) -> f64 {
        self.x1_start + j as f64 * self.x1_step
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FftWavefunction {
    pub values: Vec<C64>,
    /// Largest change between the final grid and one twice as coarse.
    pub error_estimate: f64,
    pub points: usize,
}

/// `w_t` on `grid` from a Fourier transform of the momentum-space amplitude.
pub fn wavefunction_fft(
    params: &SystemParams,
    k1: f64,
    k2: f64,
    grid: &PositionGrid,
) -> Result<FftWavefunction> {
    let a1 = scatter_single(params, k1, Direction::R)?;
    let a2 = scatter_single(params, k2, Direction::R)?;
    let plane: Vec<C64> = (0..grid.count)
        .map(|j| {
            let x1 = grid.x1(j);
            a1.t * a2.t / (2.0 * PI)
                * (C64::cis(k2 * x1 + k1 * grid.x2) + C64::cis(k1 * x1 + k2 * grid.x2))
        })
        .collect();
    if params.u == 0.0 {
        return Ok(FftWavefunction {
            values: plane,
            error_estimate: 0.0,
            points: 0,
        });
    }

    let gamma = params.gamma;
    let conv = green_convolution_quadrature(params, 0.5 * (k1 + k2))?;
    let t_s = params.u / (1.0 - C64::new(0.0, params.u / (2.0 * PI)) * conv);
    let coupling = C64::new(0.0, -gamma * gamma / (2.0 * PI))
        * mode_phases(params, Direction::R, k1).eta
        * mode_phases(params, Direction::R, k2).eta
        * t_s
        * a1.green
        * a2.green;

    let (lo, hi) = resonance_window(params, 0.5 * (k1 + k2));
    let h_max = 0.25 * resonance_width(params, lo, hi);
    let step = if grid.count > 1 { grid.x1_step.abs() } else { 1.0 };
    if !(step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "x1_step",
            reason: "must be nonzero for a multi-point grid".into(),
        });
    }
    let q = (WINDOW * step / PI).ceil().max(1.0) as usize;
    let needed = (2.0 * PI * q as f64 / (step * h_max)).ceil() as usize;
    let m = needed.next_power_of_two();
    if 2 * m > MAX_POINTS {
        return Err(Error::GridTooCoarse {
            required: 2 * m,
            limit: MAX_POINTS,
        });
    }
    let coarse = correlated_on_grid(params, k1, k2, grid, q, m, step);
    let fine = correlated_on_grid(params, k1, k2, grid, q, 2 * m, step);
    let error_estimate = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| ((a - b) * coupling).norm())
        .fold(0.0, f64::max);
    let values = plane
        .iter()
        .zip(&fine)
        .map(|(pw, f)| pw + coupling * f)
        .collect();
    Ok(FftWavefunction {
        values,
        error_estimate,
        points: 2 * m,
    })
}

/// `F_t` on the grid from `m` momentum samples spaced so that the grid step is
/// `q` FFT bins.
fn correlated_on_grid(
    params: &SystemParams,
    k1: f64,
    k2: f64,
    grid: &PositionGrid,
    q: usize,
    m: usize,
    step: f64,
) -> Vec<C64> {
    let total = k1 + k2;
    let k_bar = 0.5 * total;
    let h = 2.0 * PI * q as f64 / (m as f64 * step);
    let p0 = k_bar - 0.5 * m as f64 * h;
    let x_start = grid.x1_start - grid.x2;
    let gamma = params.gamma;
    let eta_conj = |p: f64| (C64::cis(params.phi) + C64::cis(params.theta_r(p))).conj();
    let g0 = |p: f64| C64::new(p, 2.0 * gamma).inv();

    let mut buf: Vec<C64> = (0..m)
        .map(|j| {
            let p = p0 + j as f64 * h;
            let r = total - p;
            let weight = eta_conj(p) * eta_conj(r);
            let remainder = weight
                * (green_unchecked(params, p) * green_unchecked(params, r) - g0(p) * g0(r));
            remainder * C64::cis(j as f64 * h * x_start) * h
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);

    (0..grid.count)
        .map(|j| {
            let x = x_start + j as f64 * step * grid.x1_step.signum();
            let idx = ((j as u128 * q as u128) % m as u128) as usize;
            let idx = if grid.x1_step < 0.0 { (m - idx) % m } else { idx };
            let remainder = C64::cis(p0 * x) * buf[idx];
            let smooth = subtracted_transform(params, total, x);
            C64::cis(total * grid.x2) * (remainder + smooth) / PI
        })
        .collect()
}

/// `∫ dp e^{ipX} η*_p η*_{P−p} G₀(p) G₀(P−p)` in closed form.
fn subtracted_transform(params: &SystemParams, total: f64, x: f64) -> C64 {
    let gamma = params.gamma;
    let d = params.d;
    let theta0 = params.phase_k0d;
    let phi = params.phi;
    // ∫ e^{ipY}/(p + 2iγ) dp, principal value at Y = 0
    let j = |y: f64| -> C64 {
        if y > 0.0 {
            C64::new(0.0, 0.0)
        } else if y == 0.0 {
            C64::new(0.0, -PI)
        } else {
            C64::new(0.0, -2.0 * PI) * (2.0 * gamma * y).exp()
        }
    };
    let pair = |y: f64| j(y) + C64::cis(total * y) * j(-y);
    let a0 = C64::cis(-2.0 * phi) + C64::cis(-(2.0 * theta0 + total * d));
    let b0 = C64::cis(-phi - theta0);
    (a0 * pair(x) + b0 * (pair(x - d) + C64::cis(-total * d) * pair(x + d)))
        / C64::new(total, 4.0 * gamma)
}
