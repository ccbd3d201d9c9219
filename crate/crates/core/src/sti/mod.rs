//! Speech Transmission Index from a room impulse response.
//!
//! The response is split into seven octave bands, each band yields a
//! modulation transfer ratio at fourteen modulation frequencies (reduced by
//! the band signal-to-noise ratio), and the ratios are folded into a single
//! index with the male-speech band weights of IEC 60268-16 (rev. 4).

mod empirical;
mod index;
mod mtf;
mod noise;
mod octave;

pub use empirical::{empirical_sti, empirical_t60, EmpiricalSti};
pub use index::{sti_from_mtf, sti_rating, Rating, StiResult, Weighting, FEMALE, MALE};
pub use mtf::{filter_mtf, mtf, noise_factor, MtfMatrix, MODULATION_FREQS_HZ, NUM_MOD_FREQS};
pub use noise::{band_snr, masking_intensity, HearingModel, THRESHOLD_DB};
pub use octave::{band_reference_energy, octave_filter, OctaveBands, PRE_ROLL};

use crate::bands::BandSpectrum;
use crate::error::Result;
use crate::rir::ImpulseResponse;

/// STI of a band-split response given the speech and noise intensities that
/// reach the listener (energy spectra re `P0²`).
pub fn sti_with_noise(bands: &OctaveBands, signal: &BandSpectrum, noise: &BandSpectrum, hearing: HearingModel) -> StiResult {
    let snr = band_snr(signal, noise, hearing);
    let m = MtfMatrix::from_bands(bands, &snr);
    let mut result = sti_from_mtf(&m, &MALE);
    result.snr = Some(snr);
    result
}

/// STI of a source emitting `source_level` (dB SPL at 1 m per band) heard
/// through `h`, with `noise` (energy at the listener) added.
pub fn sti_for_source(h: &ImpulseResponse, source_level: &BandSpectrum, noise: &BandSpectrum, hearing: HearingModel) -> Result<StiResult> {
    let bands = octave_filter(h)?;
    let signal = source_level.scale_energy(&bands.gains());
    Ok(sti_with_noise(&bands, &signal, noise, hearing))
}

/// Pure-reverberation STI: no noise, no masking, no hearing threshold.
pub fn sti_noiseless(h: &ImpulseResponse) -> Result<StiResult> {
    let bands = octave_filter(h)?;
    let snr = BandSpectrum::db([f64::INFINITY; crate::NUM_BANDS]);
    let m = MtfMatrix::from_bands(&bands, &snr);
    let mut result = sti_from_mtf(&m, &MALE);
    result.snr = Some(snr);
    Ok(result)
}
