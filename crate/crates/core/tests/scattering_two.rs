use std::f64::consts::PI;

use giantwg_core::{
    g2_transmitted, g2_transmitted_eval, mode_phases, scatter_single, Direction, SystemParams,
};
use num_complex::Complex64 as C64;

/// Parameters with the propagation phase pinned to `θ_R(k_i) = π − φ`.
fn pinned(u: f64, phi: f64, d: f64, k_i: f64) -> SystemParams {
    SystemParams::new(1.0, u, phi, d, 0.0)
        .unwrap()
        .with_propagation_phase(PI - phi, k_i)
}

/// Decay time of two-photon correlations at `θ_R = π − φ`: the resonance is
/// `2γ sin²φ` wide, stretched by the group delay `1 + 2γ|cos φ|d`.
fn correlation_time(phi: f64, d: f64) -> f64 {
    (1.0 + 2.0 * phi.cos().abs() * d) / (2.0 * phi.sin().powi(2))
}

#[test]
fn g2_relaxes_to_one_beyond_the_correlation_time() {
    for (u, phi, k_i, d) in [
        (1.0, PI / 15.0, 0.0, 0.01),
        (1.0, PI / 15.0, 0.0, 1.0),
        (1.0, PI / 15.0, 0.0, 4.0),
        (1.0, PI / 15.0, 0.5, 0.01),
        (1.0, PI / 15.0, 0.5, 1.0),
        (0.1, PI / 15.0, 0.3, 1.0),
    ] {
        let p = pinned(u, phi, d, k_i);
        let tau = 50f64.max(10.0 * correlation_time(phi, d));
        let g2 = g2_transmitted(&p, k_i, tau).unwrap();
        assert!((g2 - 1.0).abs() < 1e-3, "U={u} k_i={k_i} d={d} tau={tau}: {g2}");
    }
}

#[test]
fn g2_still_correlated_at_fifty_when_the_resonance_is_narrow() {
    // τ_c ≈ 34/γ here, so γτ = 50 is not yet in the uncorrelated regime
    let p = pinned(1.0, PI / 15.0, 1.0, 0.5);
    let g2 = g2_transmitted(&p, 0.5, 50.0).unwrap();
    assert!((g2 - 1.0).abs() > 0.1, "{g2}");
}

/// `g²(0)` of a single lumped coupling with `Σ(k) ≡ Σ(k_i)`. The Green
/// convolution is then `−iπ/(k_i − Σ₀)` in closed form.
fn lumped_g2(p: &SystemParams, u: f64, phi: f64, k_i: f64) -> f64 {
    let theta = PI - phi;
    let sigma0 = C64::new(0.0, -2.0) * (1.0 + phi.cos() * C64::cis(theta));
    let eta = C64::cis(phi) + C64::cis(theta);
    assert!((mode_phases(p, Direction::R, k_i).eta - eta).norm() < 1e-12);
    let t = scatter_single(p, k_i, Direction::R).unwrap().t;
    let g = 1.0 / (k_i - sigma0);
    let t_s = u / (1.0 - u / (2.0 * (k_i - sigma0)));
    (1.0 - eta.norm_sqr().powi(2) * t_s * g * g * g / (2.0 * t * t)).norm_sqr()
}

#[test]
fn markov_limit_converges_linearly_in_separation() {
    for (u, phi, k_i) in [
        (1.0, PI / 15.0, 0.0),
        (1.0, PI / 15.0, 0.5),
        (0.1, PI / 15.0, 0.3),
        (1.0, PI / 3.0, -0.4),
    ] {
        let rel = |d: f64| {
            let p = pinned(u, phi, d, k_i);
            let lumped = lumped_g2(&p, u, phi, k_i);
            (g2_transmitted(&p, k_i, 0.0).unwrap() - lumped).abs() / lumped
        };
        let (coarse, fine) = (rel(0.01), rel(0.001));
        assert!(fine < 0.01, "U={u} phi={phi} k_i={k_i}: {fine}");
        // the leading correction is first order in γd
        let ratio = coarse / fine;
        assert!((8.0..12.5).contains(&ratio), "U={u} phi={phi} k_i={k_i}: {coarse} / {fine}");
    }
}

#[test]
fn hard_core_limit_saturates() {
    for (phi, k_i, d) in [(PI / 15.0, 0.5, 0.3), (PI / 3.0, -0.4, 1.0)] {
        let a = g2_transmitted(&pinned(1e6, phi, d, k_i), k_i, 0.0).unwrap();
        let b = g2_transmitted(&pinned(1e8, phi, d, k_i), k_i, 0.0).unwrap();
        assert!((a - b).abs() < 1e-3 * b, "{a} {b}");
    }
}

#[test]
fn linear_cavity_is_uncorrelated() {
    let p = SystemParams::new(1.0, 0.0, 0.9, 1.3, 0.4).unwrap();
    for tau in [0.0, 0.7, 5.0] {
        let e = g2_transmitted_eval(&p, 0.2, tau).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12, "{tau}: {}", e.value);
    }
}
