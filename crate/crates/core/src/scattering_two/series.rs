//! Geometric-shell series for the Green-function convolution and the
//! position-space correlated part.
//!
//! Every term has the form
//! `x^{m+n}/m! · e^{(ik − 2γ)Y} · Σ_{l≤n} (m+n−l)!/((n−l)! l!) · (−2iKY)^l`
//! with `K = k + 2iγ` and `x = −iγ cos φ e^{iθ_{R,k}} / K`. Terms are formed
//! in log space so that large binomials never overflow.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Relative size of the largest single term to the sum above which the sum
/// is rejected as cancellation-dominated.
pub const CANCELLATION_LIMIT: f64 = 1e6;

/// Exact `ln n!` table.
pub(crate) struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(max: usize) -> Self {
        let mut t = Vec::with_capacity(max + 1);
        t.push(0.0);
        let mut acc = 0.0f64;
        for k in 1..=max {
            acc += (k as f64).ln();
            t.push(acc);
        }
        LnFactorial(t)
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.0[n]
    }

    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// Data shared by all terms at fixed momentum.
#[derive(Clone, Copy)]
pub(crate) struct SeriesBase {
    pub gamma: f64,
    pub k: f64,
    /// `k + 2iγ`.
    pub big_k: C64,
    /// `ln x`, or `None` when `cos φ = 0` and only the `m = n = 0` term survives.
    pub ln_x: Option<C64>,
}

impl SeriesBase {
    pub fn new(params: &SystemParams, k: f64) -> Self {
        let gamma = params.gamma;
        let big_k = C64::new(k, 2.0 * gamma);
        let c = params.phi.cos();
        let x = C64::new(0.0, -gamma * c) * C64::cis(params.theta_r(k)) / big_k;
        SeriesBase {
            gamma,
            k,
            big_k,
            ln_x: if c == 0.0 { None } else { Some(x.ln()) },
        }
    }

    /// `|x|`, the geometric base of the expansion.
    pub fn base_modulus(&self) -> f64 {
        self.ln_x.map_or(0.0, |l| l.re.exp())
    }

    /// One term `(m, n)` at displacement `y`. Returns the value and the largest
    /// partial magnitude seen while summing over `l`.
    pub fn term(&self, lf: &LnFactorial, m: usize, n: usize, y: f64) -> (C64, f64) {
        let s = m + n;
        let ln_pow = match self.ln_x {
            Some(l) => l * s as f64,
            None if s == 0 => C64::new(0.0, 0.0),
            None => return (C64::new(0.0, 0.0), 0.0),
        };
        let ln_prefactor =
            ln_pow + lf.ln_binomial(s, n) + C64::new(-2.0 * self.gamma * y, self.k * y);
        let z = C64::new(0.0, -2.0) * self.big_k * y;
        let mut r = C64::new(1.0, 0.0);
        let mut sum = r;
        let mut peak = 1.0f64;
        // at large |z| the partial sums outgrow f64 long before e^{−2γy}
        // brings them back; keep them rescaled and carry the exponent
        let mut ln_shift = 0.0;
        for l in 0..n {
            r *= z * ((n - l) as f64 / (((s - l) * (l + 1)) as f64));
            sum += r;
            let a = r.norm();
            peak = peak.max(a);
            if peak > RESCALE {
                r /= RESCALE;
                sum /= RESCALE;
                peak /= RESCALE;
                ln_shift += RESCALE.ln();
            }
            if a < 1e-18 * peak && ((n - l - 1) as f64) * z.norm() < ((s - l - 1) * (l + 2)) as f64 {
                break;
            }
        }
        let scale = (ln_prefactor + ln_shift).exp();
        (scale * sum, scale.norm() * peak)
    }
}

const RESCALE: f64 = 1e200;

/// `C_mnl(k) = (m+n−l)!/((n−l)! l!) · (−2i(m−n)(k+2iγ)d)^l`.
pub fn c_mnl(params: &SystemParams, k: f64, m: usize, n: usize, l: usize) -> Result<C64> {
    check_order(params, m, n)?;
    if l > n {
        return Err(Error::InvalidParameter {
            name: "l",
            reason: format!("must satisfy l <= n, got l = {l}, n = {n}"),
        });
    }
    let s = m + n;
    let coef = if s <= 20 {
        let fact = |j: usize| (1..=j as u64).product::<u64>() as f64;
        fact(s - l) / (fact(n - l) * fact(l))
    } else {
        let lf = LnFactorial::new(s);
        (lf.get(s - l) - lf.get(n - l) - lf.get(l)).exp()
    };
    let delta = m as f64 - n as f64;
    let z = C64::new(0.0, -2.0 * delta) * C64::new(k, 2.0 * params.gamma) * params.d;
    Ok(coef * z.powu(l as u32))
}

/// `F_mn(k) = e^{i(m−n)(k+2iγ)d}/m! · x^{m+n} · Σ_l C_mnl(k)`.
pub fn f_mn(params: &SystemParams, k: f64, m: usize, n: usize) -> Result<C64> {
    check_order(params, m, n)?;
    let lf = LnFactorial::new(m + n);
    let base = SeriesBase::new(params, k);
    Ok(base.term(&lf, m, n, (m as f64 - n as f64) * params.d).0)
}

fn check_order(params: &SystemParams, m: usize, n: usize) -> Result<()> {
    let max = params.controls.series_max_order;
    if m + n > max {
        return Err(Error::OrderOverflow { order: m + n, max });
    }
    Ok(())
}

/// Outcome of a shell-by-shell summation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ShellSum {
    pub value: C64,
    pub orders_used: usize,
    pub truncation_error_estimate: f64,
    pub cancellation: f64,
}

/// Sums `shell(s)` for `s = 0, 1, ...` until three consecutive shells are
/// negligible. `shell` returns the shell value and its largest term.
///
/// Convergence is not declared before shell `min_shells`: below it the terms
/// can be suppressed by the step weights or by `e^{−2γY}` and underflow to
/// zero while the shells that carry the sum are still ahead.
pub(crate) fn sum_shells(
    params: &SystemParams,
    base: &SeriesBase,
    min_shells: usize,
    mut shell: impl FnMut(usize) -> (C64, f64),
) -> Result<ShellSum> {
    let tol = params.controls.series_rel_tol;
    let max_order = params.controls.series_max_order;
    // Shells shrink roughly like (2|x|)^s; the tail after a shell is bounded by
    // its size over (1 − q).
    let q = (2.0 * base.base_modulus()).min(0.999);
    let tail_factor = 1.0 / (1.0 - q);
    let mut total = C64::new(0.0, 0.0);
    let mut peak = 0.0f64;
    let mut quiet = 0;
    let mut last_rel = f64::INFINITY;
    let mut worst_recent = 0.0f64;
    for s in 0..=max_order {
        let (v, p) = shell(s);
        if !(v.re.is_finite() && v.im.is_finite() && p.is_finite()) {
            return Err(Error::SeriesDiverged {
                orders: s,
                last_shell: f64::INFINITY,
                cancellation: f64::INFINITY,
            });
        }
        total += v;
        peak = peak.max(p);
        let scale = total.norm();
        last_rel = if scale > 0.0 {
            v.norm() * tail_factor / scale
        } else if v.norm() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if last_rel < tol {
            quiet += 1;
            worst_recent = worst_recent.max(last_rel);
        } else {
            quiet = 0;
            worst_recent = 0.0;
        }
        if quiet >= 3 && s >= min_shells {
            let cancellation = if scale > 0.0 { peak / scale } else { 1.0 };
            if cancellation > CANCELLATION_LIMIT {
                return Err(Error::SeriesDiverged {
                    orders: s,
                    last_shell: last_rel,
                    cancellation,
                });
            }
            return Ok(ShellSum {
                value: total,
                orders_used: s,
                truncation_error_estimate: worst_recent,
                cancellation,
            });
        }
    }
    let scale = total.norm();
    Err(Error::SeriesDiverged {
        orders: max_order,
        last_shell: last_rel,
        cancellation: if scale > 0.0 { peak / scale } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(phi: f64, d: f64, phase_k0d: f64) -> SystemParams {
        SystemParams::new(1.0, 0.0, phi, d, phase_k0d).unwrap()
    }

    #[test]
    fn c_mnl_examples() {
        let p = params(0.3, 1.0, 0.0);
        assert_eq!(c_mnl(&p, 0.7, 0, 0, 0).unwrap(), C64::new(1.0, 0.0));
        for l in 1..=4 {
            assert_eq!(c_mnl(&p, 0.7, 4, 4, l).unwrap().norm(), 0.0);
        }
        let v = c_mnl(&p, 0.0, 2, 1, 1).unwrap();
        assert!((v - C64::new(8.0, 0.0)).norm() < 1e-14, "{v}");
    }

    #[test]
    fn c_mnl_order_guard() {
        let mut p = params(0.3, 1.0, 0.0);
        p.controls.series_max_order = 10;
        assert!(matches!(
            c_mnl(&p, 0.0, 6, 5, 0),
            Err(Error::OrderOverflow { order: 11, max: 10 })
        ));
    }

    #[test]
    fn f_mn_examples() {
        let p = params(0.3, 1.0, 0.5);
        assert!((f_mn(&p, 0.2, 0, 0).unwrap() - 1.0).norm() < 1e-15);
        let q = params(PI / 2.0, 1.0, 0.5);
        assert!(f_mn(&q, 0.2, 3, 1).unwrap().norm() < 1e-60);

        let phi = 0.4;
        let d = 0.8;
        let p = params(phi, d, PI - phi);
        let expected = (-2.0 * d).exp()
            * (C64::new(0.0, -phi.cos()) * C64::cis(PI - phi) / C64::new(0.0, 2.0));
        assert!((f_mn(&p, 0.0, 1, 0).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn f_mn_matches_explicit_sum() {
        let p = params(0.9, 0.6, 1.2);
        let k = 0.35;
        for (m, n) in [(3, 2), (5, 5), (2, 4), (7, 3)] {
            let big_k = C64::new(k, 2.0);
            let x = C64::new(0.0, -p.phi.cos()) * C64::cis(p.theta_r(k)) / big_k;
            let mfact: f64 = (1..=m).map(|j| j as f64).product();
            let direct: C64 = (0..=n).map(|l| c_mnl(&p, k, m, n, l).unwrap()).sum::<C64>()
                * (C64::i() * (m as f64 - n as f64) * big_k * p.d).exp()
                * x.powu((m + n) as u32)
                / mfact;
            let got = f_mn(&p, k, m, n).unwrap();
            assert!((got - direct).norm() < 1e-13 * direct.norm().max(1e-300), "{m} {n}");
        }
    }

    #[test]
    fn ln_binomial_is_exact_enough() {
        let lf = LnFactorial::new(60);
        assert!((lf.ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-13);
        assert!((lf.ln_binomial(60, 30) - 1.1826458156486115e17f64.ln()).abs() < 1e-12);
    }
}
