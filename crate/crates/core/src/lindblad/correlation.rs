//! Two-time correlations by quantum regression, the reflected photon
//! density and output-field statistics.

use std::sync::OnceLock;

use faer::Mat;
use num_complex::Complex64 as C64;

use super::fock::{lower, lower_right, moment};
use super::liouvillian::{build_liouvillian_with_cutoff, LiouvillianMatrix};
use super::propagate::{propagate_ode, SpectralPropagator, ODE_HORIZON};
use super::semiclassical::default_cutoff;
use super::steady::{cavity_observables, steady_state, CavityObservables, SteadyState};
use crate::error::{Error, Result};
use crate::model::{mode_phases, DriveConfig, SystemParams};

/// The master equation is exact only when `|cos φ|` is below this.
pub const MARKOV_COS_LIMIT: f64 = 1e-9;

/// Steady state of one drive point plus the machinery to propagate
/// operators from it.
pub struct Correlator {
    pub params: SystemParams,
    pub drive: DriveConfig,
    pub liouvillian: LiouvillianMatrix,
    pub state: SteadyState,
    spectral: OnceLock<std::result::Result<SpectralPropagator, Error>>,
}

impl Correlator {
    pub fn new(params: &SystemParams, drive: &DriveConfig) -> Result<Self> {
        Self::with_cutoff(params, drive, default_cutoff(params, drive))
    }

    pub fn with_cutoff(params: &SystemParams, drive: &DriveConfig, cutoff: usize) -> Result<Self> {
        if params.phi.cos().abs() > MARKOV_COS_LIMIT {
            return Err(Error::InvalidParameter {
                name: "phi",
                reason: format!(
                    "the Markovian master equation needs phi = ±π/2, got {}",
                    params.phi
                ),
            });
        }
        let liouvillian = build_liouvillian_with_cutoff(params, drive, cutoff);
        let state = steady_state(&liouvillian)?;
        Ok(Correlator {
            params: params.clone(),
            drive: drive.clone(),
            liouvillian,
            state,
            spectral: OnceLock::new(),
        })
    }

    pub fn cutoff(&self) -> usize {
        self.liouvillian.cutoff
    }

    pub fn observables(&self) -> Result<CavityObservables> {
        cavity_observables(&self.state)
    }

    /// `exp(Lτ) X`.
    pub fn propagate(&self, x: &Mat<C64>, tau: f64) -> Result<Mat<C64>> {
        if tau * self.params.gamma <= ODE_HORIZON {
            propagate_ode(&self.liouvillian, x, tau, self.params.controls.ode_rel_tol)
        } else {
            let sp = self
                .spectral
                .get_or_init(|| SpectralPropagator::new(&self.liouvillian))
                .as_ref()
                .map_err(Clone::clone)?;
            Ok(sp.apply(x, tau))
        }
    }

    /// Lab-frame `⟨b†(τ) b(0)⟩ = e^{ik_iτ} Tr[b† exp(Lτ)(bρ)]`.
    pub fn b_dag_b(&self, tau: f64) -> Result<C64> {
        let evolved = self.propagate(&lower(&self.state.rho), tau)?;
        Ok(C64::cis(self.drive.k_i * tau) * moment(&evolved, 1, 0))
    }

    /// Photon flux of the reflected field, `2γ(n + Re[e^{i(φ + k₀d)} ⟨b†(d)b(0)⟩])`,
    /// evaluated at this correlator's separation.
    pub fn reflected_density(&self) -> Result<f64> {
        let p = &self.params;
        let n = moment(&self.state.rho, 1, 1).re;
        if n == 0.0 {
            return Ok(0.0);
        }
        let c = self.b_dag_b(p.d)?;
        Ok(2.0 * p.gamma * (n + (C64::cis(p.phi + p.phase_k0d) * c).re))
    }

    /// `g²(0)` of the transmitted field `X = α + c₁ b(t) + c₂ b(t + σd)`, with
    /// operators at the later time placed next to the regression propagator.
    pub fn transmitted_g2(&self) -> Result<f64> {
        let p = &self.params;
        let drive = &self.drive;
        let sqrt_g = p.gamma.sqrt();
        let alpha = C64::new(drive.omega0 / sqrt_g, 0.0);
        let minus_i_sqrt_g = C64::new(0.0, -sqrt_g);
        let near = minus_i_sqrt_g * C64::cis(-p.phi);
        let theta = mode_phases(p, drive.direction, drive.mode_momentum()).theta;
        let far = minus_i_sqrt_g * C64::cis(-theta);
        // R output sees the second coupling point later, L output earlier.
        let (early, late) = match drive.direction {
            crate::model::Direction::R => (near, far),
            crate::model::Direction::L => (far, near),
        };
        let rho = &self.state.rho;
        // evolved[i][i'] = exp(Ld)(b^i ρ b†^{i'})
        let mut seeds = vec![vec![Mat::<C64>::zeros(1, 1); 3]; 3];
        let mut left = rho.clone();
        for i in 0..3 {
            let mut both = left.clone();
            for ip in 0..3 {
                seeds[i][ip] = both.clone();
                both = lower_right(&both);
            }
            left = lower(&left);
        }
        let mut evolved = vec![vec![Mat::<C64>::zeros(1, 1); 3]; 3];
        for i in 0..3 {
            for ip in i..3 {
                evolved[i][ip] = self.propagate(&seeds[i][ip], p.d)?;
                if ip != i {
                    evolved[ip][i] = evolved[i][ip].adjoint().to_owned();
                }
            }
        }
        let fact = [1.0, 1.0, 2.0];
        let moment_k = |k: usize| -> f64 {
            let coef = |i: usize, j: usize| -> C64 {
                let multinomial = fact[k] / (fact[k - i - j] * fact[i] * fact[j]);
                multinomial * alpha.powu((k - i - j) as u32) * early.powu(i as u32) * late.powu(j as u32)
            };
            let mut total = C64::new(0.0, 0.0);
            for i in 0..=k {
                for j in 0..=k - i {
                    for ip in 0..=k {
                        for jp in 0..=k - ip {
                            let c = coef(i, j) * coef(ip, jp).conj();
                            total += c * moment(&evolved[i][ip], jp, j);
                        }
                    }
                }
            }
            total.re
        };
        let m1 = moment_k(1);
        if m1 <= 1e-300 {
            return Err(Error::UndefinedG2("transmitted field is empty"));
        }
        Ok(moment_k(2) / (m1 * m1))
    }
}

/// Lab-frame `⟨b†(τ) b(0)⟩` in the steady state.
pub fn two_time_correlation(params: &SystemParams, drive: &DriveConfig, tau: f64) -> Result<C64> {
    Correlator::new(params, drive)?.b_dag_b(tau)
}

/// Reflected photon density for each separation in `d_values`, holding `φ`
/// and `k₀d` fixed. Separations that leave the drive unchanged share one
/// steady state.
pub fn reflected_density(params: &SystemParams, drive: &DriveConfig, d_values: &[f64]) -> Result<Vec<f64>> {
    let mut cache: Option<(C64, Correlator)> = None;
    let mut out = Vec::with_capacity(d_values.len());
    for &d in d_values {
        let mut p = params.clone();
        p.d = d;
        p.validate()?;
        let omega = drive.rabi(&p);
        let reuse = matches!(&cache, Some((w, _)) if (w - omega).norm() <= 1e-12 * (1.0 + omega.norm()));
        if reuse {
            let (_, corr) = cache.as_mut().unwrap();
            corr.params.d = d;
        } else {
            cache = Some((omega, Correlator::new(&p, drive)?));
        }
        out.push(cache.as_ref().unwrap().1.reflected_density()?);
    }
    Ok(out)
}

/// `g²(0)` of the transmitted output field at the drive's direction.
pub fn transmitted_g2_output(params: &SystemParams, drive: &DriveConfig) -> Result<f64> {
    Correlator::new(params, drive)?.transmitted_g2()
}
