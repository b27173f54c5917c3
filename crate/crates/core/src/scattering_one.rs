//! Single-photon self-energy, Green function and scattering amplitudes.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{mode_phases, Direction, SystemParams};

/// |k − Σ(k)| below `SINGULAR_THRESHOLD * gamma` is a bound state in the continuum.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterAmplitudes {
    pub r: C64,
    pub t: C64,
    pub sigma: C64,
    pub green: C64,
    pub direction: Direction,
}

/// `Σ(k) = −2iγ (1 + cos φ e^{iθ_{R,k}})`; `Im Σ <= 0`.
pub fn self_energy(params: &SystemParams, k: f64) -> C64 {
    let c = params.phi.cos();
    C64::new(0.0, -2.0 * params.gamma) * (1.0 + c * C64::cis(params.theta_r(k)))
}

/// `1 / (k − Σ(k))` without the singularity check. Used inside integrands.
#[inline]
pub(crate) fn green_unchecked(params: &SystemParams, k: f64) -> C64 {
    (k - self_energy(params, k)).inv()
}

pub fn green(params: &SystemParams, k: f64) -> Result<C64> {
    let den = k - self_energy(params, k);
    let distance = den.norm();
    if distance < SINGULAR_THRESHOLD * params.gamma {
        return Err(Error::SingularGreenFunction { k, distance });
    }
    Ok(den.inv())
}

/// Reflection and transmission of a photon with momentum label `k` entering
/// from `input`. For L input the incoming mode is `(L, −k)`.
pub fn scatter_single(params: &SystemParams, k: f64, input: Direction) -> Result<ScatterAmplitudes> {
    let g = green(params, k)?;
    let eta_r = mode_phases(params, Direction::R, k).eta;
    let eta_l = mode_phases(params, Direction::L, -k).eta;
    let mig = C64::new(0.0, -params.gamma) * g;
    let (eta_in, eta_out) = match input {
        Direction::R => (eta_r, eta_l),
        Direction::L => (eta_l, eta_r),
    };
    Ok(ScatterAmplitudes {
        r: mig * eta_out.conj() * eta_in,
        t: 1.0 + mig * eta_in.norm_sqr(),
        sigma: self_energy(params, k),
        green: g,
        direction: input,
    })
}
