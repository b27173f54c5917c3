//! Adaptive Gauss–Kronrod quadrature over the real momentum line.
//!
//! Integrands decay like `1/u²`. The line is cut at `|u| = CUTOFF` and the
//! remainder is added analytically from the leading asymptotic term.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::scattering_one::green_unchecked;

/// Momentum cutoff (in units of γ) beyond which tails are analytic.
pub const CUTOFF: f64 = 2.0e4;
const MAX_INTERVALS: usize = 4_000_000;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525478190,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
/// Weights of the embedded 10-point Gauss rule, on nodes `XGK[1], XGK[3], ...`.
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// 21-point Kronrod estimate on `[a, b]` and its difference to the Gauss rule.
fn gk21(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = C64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

struct Piece {
    a: f64,
    b: f64,
    value: C64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over the union of consecutive intervals given by `breaks`,
/// bisecting the worst interval until the summed error estimate falls below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> C64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<C64> {
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (value, e) = gk21(&f, w[0], w[1]);
        total += value;
        err += e;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value,
            err: e,
        });
    }
    while err > abs_tol.max(rel_tol * total.norm()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNotConverged {
                error_estimate: err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::QuadratureNotConverged {
                error_estimate: err,
                intervals: heap.len(),
            });
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
    // Re-sum to shed the drift of the running updates.
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Narrowest expected resonance width of `G` for momenta in `[lo, hi]`: the
/// smallest decay rate `−Im Σ` there, narrowed by the group delay `1 + 2γ|cos φ|d`.
pub(crate) fn resonance_width(params: &SystemParams, lo: f64, hi: f64) -> f64 {
    let gamma = params.gamma;
    let c = params.phi.cos();
    let min_decay = if params.d == 0.0 {
        2.0 * gamma * (1.0 + c * params.phase_k0d.cos())
    } else if (hi - lo) * params.d >= 2.0 * PI {
        2.0 * gamma * (1.0 - c.abs())
    } else {
        let samples = 512;
        (0..=samples)
            .map(|j| {
                let k = lo + (hi - lo) * j as f64 / samples as f64;
                2.0 * gamma * (1.0 + c * params.theta_r(k).cos())
            })
            .fold(f64::INFINITY, f64::min)
    };
    min_decay.max(1e-6 * gamma) / (1.0 + 2.0 * gamma * c.abs() * params.d)
}

/// Resonance window `[lo, hi]` holding the poles of `G(p)` and `G(2k̄ − p)`.
pub(crate) fn resonance_window(params: &SystemParams, k_bar: f64) -> (f64, f64) {
    let reach = 3.0 * params.gamma;
    (
        (-reach).min(2.0 * k_bar - reach),
        reach.max(2.0 * k_bar + reach),
    )
}

/// Fine panel width for the resonance window.
fn fine_step(params: &SystemParams, k_bar: f64) -> f64 {
    let (lo, hi) = resonance_window(params, k_bar);
    let fine = (0.05 * params.gamma).min(0.5 * resonance_width(params, lo, hi));
    fine.max((hi - lo) / MAX_FINE_PANELS as f64)
}

const MAX_FINE_PANELS: usize = 400_000;

/// Break points covering `[lo, CUTOFF]`: panels of width `fine` on `near`,
/// growing geometrically away from it but never wider than `period`, the
/// shortest oscillation length of the integrand. Refuses grids that would
/// exceed the interval budget before allocating them.
fn breakpoints(lo: f64, near: (f64, f64), fine: f64, period: f64) -> Result<Vec<f64>> {
    let estimate = (CUTOFF - lo) / period + (near.1 - near.0) / fine;
    if estimate > 2.0 * MAX_INTERVALS as f64 {
        return Err(Error::QuadratureNotConverged {
            error_estimate: f64::INFINITY,
            intervals: estimate.min(usize::MAX as f64) as usize,
        });
    }
    let away = |from: f64, to: f64| -> Vec<f64> {
        let sign = (to - from).signum();
        let mut pts = Vec::new();
        let mut x = from;
        while (to - x) * sign > 0.0 {
            let h = (0.25 * (x - from).abs()).max(fine).min(period).max(fine);
            x += sign * h;
            if (to - x) * sign < 0.0 {
                x = to;
            }
            pts.push(x);
        }
        pts
    };
    let mut out = Vec::new();
    if lo < near.0 {
        let mut left = away(near.0, lo);
        left.reverse();
        out.extend(left);
    }
    out.push(near.0);
    let n_fine = ((near.1 - near.0) / fine).ceil().max(1.0) as usize;
    for j in 1..=n_fine {
        out.push(near.0 + (near.1 - near.0) * j as f64 / n_fine as f64);
    }
    out.extend(away(near.1, CUTOFF));
    Ok(out)
}

/// `∫ dω G(ω) G(2k̄ − ω)` by adaptive quadrature.
pub fn green_convolution_quadrature(params: &SystemParams, k_bar: f64) -> Result<C64> {
    let p = params.clone();
    // The integrand is even in u = ω − k̄.
    let f = move |u: f64| green_unchecked(&p, k_bar + u) * green_unchecked(&p, k_bar - u);
    let near_hi = k_bar.abs() + 3.0 * params.gamma;
    let fine = fine_step(params, k_bar);
    let period = if params.d > 0.0 { 2.0 * PI / params.d } else { f64::INFINITY };
    let breaks = breakpoints(0.0, (0.0, near_hi), fine, period)?;
    let half = integrate_adaptive(f, &breaks, 0.5 * params.controls.quadrature_abs_tol, 1e-13)?;
    // ∫_{|u|>R} −du/u²
    Ok(2.0 * half - 2.0 / CUTOFF)
}

/// `(1/π) ∫ dp e^{ipX₁} e^{i(2k̄−p)X₂} η*_p η*_{2k̄−p} G(p) G(2k̄−p)`.
pub fn correlated_part_quadrature(params: &SystemParams, k_bar: f64, x1: f64, x2: f64) -> Result<C64> {
    let p = params.clone();
    let eta_conj = move |k: f64| (C64::cis(p.phi) + C64::cis(p.theta_r(k))).conj();
    let q = params.clone();
    let f = move |u: f64| {
        let a = k_bar + u;
        let b = k_bar - u;
        C64::cis(a * x1 + b * x2) * eta_conj(a) * eta_conj(b) * green_unchecked(&q, a) * green_unchecked(&q, b)
    };
    let near = (-(k_bar.abs() + 3.0 * params.gamma), k_bar.abs() + 3.0 * params.gamma);
    let fine = fine_step(params, k_bar);
    let x = x1 - x2;
    let freq = x.abs() + params.d;
    let period = if freq > 0.0 { 2.0 * PI / freq } else { f64::INFINITY };
    let breaks = breakpoints(-CUTOFF, near, fine, period)?;
    let body = integrate_adaptive(f, &breaks, params.controls.quadrature_abs_tol * PI, 1e-13)?;

    let theta = params.theta_r(k_bar);
    let a = C64::cis(-2.0 * params.phi) + C64::cis(-2.0 * theta);
    let b = C64::cis(-params.phi - theta);
    let tail = -C64::cis(k_bar * (x1 + x2))
        * (a * tail_kernel(x) + b * (tail_kernel(x - params.d) + tail_kernel(x + params.d)));
    Ok((body + tail) / PI)
}

/// `∫_{|u|>CUTOFF} e^{iuY}/u² du`.
fn tail_kernel(y: f64) -> C64 {
    let r = CUTOFF;
    let ay = y.abs();
    C64::new(2.0 * ((r * y).cos() / r - ay * (FRAC_PI_2 - sine_integral(r * ay))), 0.0)
}

/// Sine integral `Si(x) = ∫_0^x sin t / t dt` for `x >= 0`.
pub(crate) fn sine_integral(x: f64) -> f64 {
    if x < 25.0 {
        // Power series; the cancellation error stays below ~1e-6·x there.
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0usize;
        loop {
            let a = (2 * k + 1) as f64;
            let b = (2 * k + 2) as f64;
            let c = (2 * k + 3) as f64;
            term *= -x2 / (b * c);
            let add = term / c;
            sum += add;
            k += 1;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) && a > x {
                break;
            }
        }
        sum
    } else {
        // Asymptotic expansion, Si = π/2 − f cos x − g sin x.
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        let mut f = 0.0;
        let mut g = 0.0;
        let mut tf = inv;
        let mut tg = inv2;
        for k in 0..20 {
            let kf = (2 * k) as f64;
            if k > 0 {
                let nf = tf * -((kf - 1.0) * kf) * inv2;
                let ng = tg * -(kf * (kf + 1.0)) * inv2;
                if nf.abs() > tf.abs() {
                    break;
                }
                tf = nf;
                tg = ng;
            }
            f += tf;
            g += tg;
        }
        FRAC_PI_2 - f * x.cos() - g * x.sin()
    }
}
