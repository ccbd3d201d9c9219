use serde::{Deserialize, Serialize};

use std::cell::RefCell;

use super::octave::{octave_filter, OctaveBands};
use crate::rir::ImpulseResponse;
use crate::bands::{BandSpectrum, NUM_BANDS};
use crate::decay;

pub const NUM_MOD_FREQS: usize = 14;

pub const MODULATION_FREQS_HZ: [f64; NUM_MOD_FREQS] =
    [0.63, 0.8, 1.0, 1.25, 1.6, 2.0, 2.5, 3.15, 4.0, 5.0, 6.3, 8.0, 10.0, 12.5];

/// Energy below the backward-integrated level of -60 dB is not integrated.
const TRUNCATION_DB: f64 = 60.0;

/// Modulation transfer ratios, `m[band][modulation frequency]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtfMatrix {
    pub m: [[f64; NUM_MOD_FREQS]; NUM_BANDS],
}

impl MtfMatrix {
    pub fn uniform(value: f64) -> Self {
        Self { m: [[value; NUM_MOD_FREQS]; NUM_BANDS] }
    }

    /// Per-band transfer of a band-split response, with the analysis
    /// filters' own transfer divided out, times the noise factor of `snr`.
    pub fn from_bands(bands: &OctaveBands, snr: &BandSpectrum) -> Self {
        let snr = snr.to_db();
        let filters = filter_mtf(bands.sample_rate);
        Self {
            m: std::array::from_fn(|k| {
                let raw = mtf(bands.band(k), bands.sample_rate, f64::INFINITY);
                let factor = noise_factor(snr.values[k]);
                std::array::from_fn(|j| (raw[j] / filters[k][j]).min(1.0) * factor)
            }),
        }
    }
}

thread_local! {
    static FILTER_MTF: RefCell<Option<(u64, [[f64; NUM_MOD_FREQS]; NUM_BANDS])>> = const { RefCell::new(None) };
}

/// Transfer of the octave filters alone: the band-split unit impulse. The
/// filter response spreads energy in time, which lowers the ratios of a
/// perfect channel by up to 3 % in the 125 Hz band.
pub fn filter_mtf(fs: f64) -> [[f64; NUM_MOD_FREQS]; NUM_BANDS] {
    if let Some(v) = FILTER_MTF.with(|c| c.borrow().filter(|(key, _)| *key == fs.to_bits()).map(|(_, v)| v)) {
        return v;
    }
    let unit = ImpulseResponse::delta((0.5 * fs) as usize, fs, 0.0);
    let v = match octave_filter(&unit) {
        Ok(bands) => std::array::from_fn(|k| mtf(bands.band(k), fs, f64::INFINITY).map(|m| m.max(f64::MIN_POSITIVE))),
        Err(_) => [[1.0; NUM_MOD_FREQS]; NUM_BANDS],
    };
    FILTER_MTF.with(|c| *c.borrow_mut() = Some((fs.to_bits(), v)));
    v
}

/// `(1 + 10^(-SNR/10))⁻¹`; `+inf` dB gives 1 and `-inf` dB gives 0.
pub fn noise_factor(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 1.0;
    }
    if snr_db == f64::NEG_INFINITY || snr_db.is_nan() {
        return 0.0;
    }
    1.0 / (1.0 + 10f64.powf(-snr_db / 10.0))
}

/// Schroeder's modulation transfer of one band-filtered response:
/// `|Σ h²·e^{-j2πf n/fs}| / Σ h²`, times the noise factor.
pub fn mtf(h_k: &[f64], fs: f64, snr_db: f64) -> [f64; NUM_MOD_FREQS] {
    let energy: Vec<f64> = h_k.iter().map(|x| x * x).collect();
    let end = decay::truncation_point(&energy, TRUNCATION_DB).max(1).min(energy.len());
    let energy = &energy[..end];
    let total: f64 = energy.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return [0.0; NUM_MOD_FREQS];
    }
    let factor = noise_factor(snr_db);
    std::array::from_fn(|j| {
        let w = 2.0 * std::f64::consts::PI * MODULATION_FREQS_HZ[j] / fs;
        let (sin_step, cos_step) = w.sin_cos();
        // Phasor recurrence, renormalized periodically against drift.
        let (mut c, mut s) = (1.0f64, 0.0f64);
        let (mut re, mut im) = (0.0, 0.0);
        for (n, &e) in energy.iter().enumerate() {
            re += e * c;
            im -= e * s;
            let nc = c * cos_step - s * sin_step;
            let ns = s * cos_step + c * sin_step;
            c = nc;
            s = ns;
            if n % 4096 == 4095 {
                let (ts, tc) = (w * (n + 1) as f64).sin_cos();
                c = tc;
                s = ts;
            }
        }
        ((re * re + im * im).sqrt() / total * factor).clamp(0.0, 1.0)
    })
}
