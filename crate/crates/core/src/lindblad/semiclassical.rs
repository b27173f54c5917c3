//! Mean-field photon numbers and the default Fock cutoff.

use crate::model::{DriveConfig, SystemParams};

/// Real nonnegative roots of `n((U n − k_i)² + 4γ²) = |Ω|²`, ascending.
pub fn semiclassical_branches(params: &SystemParams, drive: &DriveConfig) -> Vec<f64> {
    let omega2 = drive.rabi(params).norm_sqr();
    let (u, k, g) = (params.u, drive.k_i, params.gamma);
    if omega2 == 0.0 {
        return vec![0.0];
    }
    let f = |n: f64| n * ((u * n - k).powi(2) + 4.0 * g * g) - omega2;
    // every root lies below |Ω|²/4γ²
    let upper = omega2 / (4.0 * g * g);
    let mut cuts = vec![0.0];
    if u != 0.0 {
        // critical points of the cubic
        let (a, b, c) = (3.0 * u * u, -4.0 * u * k, k * k + 4.0 * g * g);
        let disc = b * b - 4.0 * a * c;
        if disc > 0.0 {
            let s = disc.sqrt();
            for r in [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)] {
                if r > 0.0 && r < upper {
                    cuts.push(r);
                }
            }
        }
    }
    cuts.push(upper);
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    roots
}

/// `ceil(3 n_max) + 10` clamped to `[20, 60]`, unless overridden.
pub fn default_cutoff(params: &SystemParams, drive: &DriveConfig) -> usize {
    if let Some(n) = params.controls.fock_cutoff {
        return n;
    }
    let top = semiclassical_branches(params, drive)
        .into_iter()
        .fold(0.0, f64::max);
    ((3.0 * top).ceil() as usize + 10).clamp(20, 60)
}
