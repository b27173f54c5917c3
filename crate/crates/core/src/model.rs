//! Physical parameters, propagation phases and the chirality condition.
//!
//! Units: frequencies and momenta in units of `gamma`, lengths in `1/gamma`,
//! group velocity 1. The bath central frequency enters only as `k0 * d`,
//! stored modulo 2π as `phase_k0d`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps an angle to the canonical interval (−π, π].
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Propagation direction of a waveguide mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    L,
    R,
}

impl Direction {
    pub fn sigma(self) -> f64 {
        match self {
            Direction::R => 1.0,
            Direction::L => -1.0,
        }
    }

    pub fn flipped(self) -> Direction {
        match self {
            Direction::R => Direction::L,
            Direction::L => Direction::R,
        }
    }
}

/// Knobs for the series, quadrature, Fock-space and ODE solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericalControls {
    pub series_rel_tol: f64,
    /// Cap on the shell index `m + n`.
    pub series_max_order: usize,
    /// `None` selects the cutoff from the semiclassical branches.
    pub fock_cutoff: Option<usize>,
    pub quadrature_abs_tol: f64,
    pub ode_rel_tol: f64,
}

impl Default for NumericalControls {
    fn default() -> Self {
        NumericalControls {
            series_rel_tol: 1e-12,
            series_max_order: 2000,
            fock_cutoff: None,
            quadrature_abs_tol: 1e-11,
            ode_rel_tol: 1e-10,
        }
    }
}

impl NumericalControls {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        };
        positive("series_rel_tol", self.series_rel_tol)?;
        positive("quadrature_abs_tol", self.quadrature_abs_tol)?;
        positive("ode_rel_tol", self.ode_rel_tol)?;
        if self.series_max_order == 0 {
            return Err(Error::InvalidParameter {
                name: "series_max_order",
                reason: "must be >= 1".into(),
            });
        }
        if let Some(n) = self.fock_cutoff {
            if n < 2 {
                return Err(Error::InvalidParameter {
                    name: "fock_cutoff",
                    reason: format!("must be >= 2, got {n}"),
                });
            }
        }
        Ok(())
    }
}

/// Cavity, coupling geometry and solver controls.
///
/// `phi` is kept in (−π, π]; construct through [`SystemParams::new`] or
/// re-validate after mutating fields by hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub gamma: f64,
    pub u: f64,
    pub phi: f64,
    pub d: f64,
    /// `k0 * d` modulo 2π.
    pub phase_k0d: f64,
    pub controls: NumericalControls,
}

impl SystemParams {
    pub fn new(gamma: f64, u: f64, phi: f64, d: f64, phase_k0d: f64) -> Result<Self> {
        let p = SystemParams {
            gamma,
            u,
            phi: normalize_angle(phi),
            d,
            phase_k0d: normalize_angle(phase_k0d),
            controls: NumericalControls::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                })
            }
        };
        finite("gamma", self.gamma)?;
        finite("U", self.u)?;
        finite("phi", self.phi)?;
        finite("d", self.d)?;
        finite("phase_k0d", self.phase_k0d)?;
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be > 0, got {}", self.gamma),
            });
        }
        if self.d < 0.0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: format!("must be >= 0, got {}", self.d),
            });
        }
        self.controls.validate()
    }

    /// Single-point coupling, `gamma = 2π V0²`.
    pub fn v0(&self) -> f64 {
        (self.gamma / TAU).sqrt()
    }

    pub fn with_controls(mut self, controls: NumericalControls) -> Self {
        self.controls = controls;
        self
    }

    /// Chooses `phase_k0d` so that `θ_{R,k} = theta` at momentum `k`.
    pub fn with_propagation_phase(mut self, theta: f64, k: f64) -> Self {
        self.phase_k0d = normalize_angle(theta - k * self.d);
        self
    }

    /// Sets `phi` to the chiral value for drive momentum `k_i`.
    pub fn with_chiral_phase(mut self, k_i: f64, n: i64) -> Self {
        self.phi = chiral_phase(k_i, &self, n);
        self
    }

    /// Propagation phase `θ_{R,k} = k0 d + k d`.
    pub fn theta_r(&self, k: f64) -> f64 {
        self.phase_k0d + k * self.d
    }
}

/// Coherent drive entering through one waveguide direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub direction: Direction,
    pub k_i: f64,
    pub omega0: f64,
}

impl DriveConfig {
    pub fn new(direction: Direction, k_i: f64, omega0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega0",
                reason: format!("must be finite and >= 0, got {omega0}"),
            });
        }
        if !k_i.is_finite() {
            return Err(Error::InvalidParameter {
                name: "k_i",
                reason: format!("must be finite, got {k_i}"),
            });
        }
        Ok(DriveConfig {
            direction,
            k_i,
            omega0,
        })
    }

    /// Momentum label of the driven mode: `k_i` for R, `−k_i` for L.
    pub fn mode_momentum(&self) -> f64 {
        self.direction.sigma() * self.k_i
    }

    /// Rabi amplitude `Ω = Ω0 η`. Couplings below 1e-12 are exactly dark.
    pub fn rabi(&self, params: &SystemParams) -> C64 {
        let eta = mode_phases(params, self.direction, self.mode_momentum()).eta;
        if eta.norm() < DARK_COUPLING {
            C64::new(0.0, 0.0)
        } else {
            eta * self.omega0
        }
    }
}

/// |η| below this is treated as an exactly decoupled mode.
pub const DARK_COUPLING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePhases {
    pub theta: f64,
    pub eta: C64,
    pub v: C64,
}

/// Phase `θ = σ k0 d + k d`, interference factor `η = e^{iφ} + e^{iθ}` and
/// coupling `V = V0 η` of the mode with direction `direction` and momentum `k`.
pub fn mode_phases(params: &SystemParams, direction: Direction, k: f64) -> ModePhases {
    let theta = normalize_angle(direction.sigma() * params.phase_k0d + k * params.d);
    let eta = C64::cis(params.phi) + C64::cis(theta);
    ModePhases {
        theta,
        eta,
        v: eta * params.v0(),
    }
}

/// Coupling phase that makes the left-moving mode at `−k_i` dark:
/// `φ = (2n+1)π − (k0 + k_i) d`, normalized.
pub fn chiral_phase(k_i: f64, params: &SystemParams, n: i64) -> f64 {
    normalize_angle((2 * n + 1) as f64 * PI - (params.phase_k0d + k_i * params.d))
}

/// Coupling of the symmetric bath mode, `Ṽ_k = 2 V0 sqrt(1 + cos φ cos θ_{R,k})`.
pub fn effective_coupling(params: &SystemParams, k: f64) -> f64 {
    let s = 1.0 + params.phi.cos() * params.theta_r(k).cos();
    2.0 * params.v0() * s.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(phi: f64, d: f64, phase_k0d: f64) -> SystemParams {
        SystemParams::new(1.0, 0.0, phi, d, phase_k0d).unwrap()
    }

    #[test]
    fn normalize_angle_is_half_open() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((normalize_angle(-7.0 * TAU + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn v0_from_gamma() {
        let p = SystemParams::new(2.5, 0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(p.v0(), (2.5 / TAU).sqrt());
    }

    #[test]
    fn right_mode_at_quarter_phases() {
        let p = params(PI / 2.0, 1.0, PI / 2.0);
        let m = mode_phases(&p, Direction::R, 0.0);
        assert!((m.theta - PI / 2.0).abs() < 1e-15);
        assert!((m.eta - C64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((m.v - m.eta * p.v0()).norm() < 1e-16);
    }

    #[test]
    fn anti_aligned_phase_gives_two_i_sin_phi() {
        let phi = 0.015 * PI;
        let k_i = 0.09;
        let p = params(phi, 4.0, 0.0).with_propagation_phase(PI - phi, k_i);
        let eta = mode_phases(&p, Direction::R, k_i).eta;
        let direct = C64::cis(phi) + C64::cis(PI - phi);
        let reduced = C64::new(0.0, 2.0 * phi.sin());
        assert!((eta - direct).norm() < 1e-14);
        assert!((eta - reduced).norm() < 1e-14);
    }

    #[test]
    fn chiral_phase_examples() {
        let k_i = 0.3;
        let d = 2.0;
        let p = params(0.0, d, PI / 2.0 - k_i * d);
        assert!((chiral_phase(k_i, &p, 0) - PI / 2.0).abs() < 1e-15);
        let p = params(0.0, 1.0, PI);
        assert!(chiral_phase(0.0, &p, 0).abs() < 1e-15);
    }

    #[test]
    fn chiral_phase_darkens_left_mode() {
        let p = params(0.0, 1.7, 0.4).with_chiral_phase(2.3, -3);
        let eta = mode_phases(&p, Direction::L, -2.3).eta;
        assert!(eta.norm() < 1e-12);
        let drive = DriveConfig::new(Direction::L, 2.3, 5.0).unwrap();
        assert_eq!(drive.rabi(&p), C64::new(0.0, 0.0));
    }

    #[test]
    fn effective_coupling_cases() {
        let p = params(PI / 2.0, 1.3, 0.2);
        for k in [-5.0, 0.0, 3.3] {
            assert!((effective_coupling(&p, k) - 2.0 * p.v0()).abs() < 1e-15);
        }
        let p = params(0.0, 1.0, PI);
        assert!(effective_coupling(&p, 0.0).abs() < 1e-7);
        let p = params(0.0, 1.0, 0.0);
        assert!((effective_coupling(&p, 0.0) - 2.0 * 2f64.sqrt() * p.v0()).abs() < 1e-15);
    }

    #[test]
    fn validation_names_the_field() {
        let err = SystemParams::new(-1.0, 0.0, 0.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "gamma", .. }));
        let err = SystemParams::new(1.0, 0.0, 0.0, -1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "d", .. }));
        let err = DriveConfig::new(Direction::R, 0.0, -1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "omega0", .. }));
    }
}
