//! Liouvillian eigenvalues and the spectral gap.

use num_complex::Complex64 as C64;

use super::liouvillian::LiouvillianMatrix;
use crate::error::{Error, Result};

/// Eigenvalues with modulus below this count as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Leading eigenvalues, by descending real part.
    pub eigenvalues: Vec<C64>,
    /// `−Re λ₁`, with `λ₁` the leading eigenvalue after the zero mode.
    pub gap: f64,
    /// Number of eigenvalues with `|λ| < ZERO_EIGENVALUE` in the full spectrum.
    pub zero_count: usize,
}

/// The `count` eigenvalues with the largest real parts (at least two).
pub fn liouvillian_spectrum(l: &LiouvillianMatrix, count: usize) -> Result<SpectrumResult> {
    let mut ev = l
        .real_form()
        .eigenvalues()
        .map_err(|e| Error::EigenSolverFailure(format!("{e:?}")))?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let zero_count = ev.iter().filter(|z| z.norm() < ZERO_EIGENVALUE).count();
    if ev.len() < 2 {
        return Err(Error::EigenSolverFailure("spectrum has fewer than two eigenvalues".into()));
    }
    let gap = -ev[1].re;
    ev.truncate(count.max(2));
    Ok(SpectrumResult {
        eigenvalues: ev,
        gap,
        zero_count,
    })
}
