//! Volume-based reverberation and intelligibility estimates used as a
//! baseline against the simulated values.

use crate::error::{Error, Result};

/// Reverberation time at 500 Hz of a furnished room from its volume (m³):
/// `T60 = -2e-5·V² + 0.0048·V + 0.255`.
pub fn empirical_t60(volume: f64) -> Result<f64> {
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(Error::InvalidArgument(format!("volume must be positive, got {volume}")));
    }
    let t60 = -2e-5 * volume * volume + 0.0048 * volume + 0.255;
    if t60 <= 0.0 {
        return Err(Error::ModelValidity(format!("volume {volume} m³ gives non-positive T60 {t60:.3} s")));
    }
    Ok(t60)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EmpiricalSti {
    pub sti: f64,
    /// Set when the regression left [0, 1] and the value was clipped.
    pub clipped: bool,
}

/// Regression of STI on reverberation time: `STI = 0.5895 - 0.4422·log10(T60)`.
pub fn empirical_sti(t60: f64) -> Result<EmpiricalSti> {
    if !(t60 > 0.0) || !t60.is_finite() {
        return Err(Error::InvalidArgument(format!("T60 must be positive, got {t60}")));
    }
    let raw = 0.5895 - 0.4422 * t60.log10();
    let sti = raw.clamp(0.0, 1.0);
    let clipped = sti != raw;
    if clipped {
        log::warn!("empirical STI {raw:.4} for T60 {t60} s is outside [0, 1]; clipped to {sti}");
    }
    Ok(EmpiricalSti { sti, clipped })
}
