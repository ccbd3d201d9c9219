use crate::bands::{BandSpectrum, NUM_BANDS};

/// Absolute speech reception threshold per octave band, dB SPL (IEC 60268-16 rev. 4).
pub const THRESHOLD_DB: [f64; NUM_BANDS] = [46.0, 27.0, 12.0, 6.5, 7.5, 8.0, 12.0];

/// Which hearing effects add to the physical noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HearingModel {
    pub masking: bool,
    pub threshold: bool,
}

impl HearingModel {
    /// Physical noise only.
    pub const NONE: Self = Self { masking: false, threshold: false };
    pub const STANDARD: Self = Self { masking: true, threshold: true };
}

impl Default for HearingModel {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Level-dependent upward-spread masking slope in dB for a masker band at `level_db`.
fn masking_slope_db(level_db: f64) -> f64 {
    if level_db < 63.0 {
        0.5 * level_db - 65.0
    } else if level_db < 67.0 {
        1.8 * level_db - 146.9
    } else if level_db < 100.0 {
        0.5 * level_db - 59.8
    } else {
        -10.0
    }
}

/// Masking intensity spilling into each band from the band below, given the
/// total (speech + noise) intensity per band.
pub fn masking_intensity(total: &BandSpectrum) -> BandSpectrum {
    let total = total.to_energy();
    BandSpectrum::energy(std::array::from_fn(|k| {
        if k == 0 || total.values[k - 1] <= 0.0 {
            return 0.0;
        }
        let masker = total.values[k - 1];
        let level = 10.0 * masker.log10();
        masker * 10f64.powf(masking_slope_db(level) / 10.0)
    }))
}

/// Effective band signal-to-noise ratio in dB:
/// `10·log10(I_signal / (I_noise + I_masking + I_threshold))`.
///
/// Intensities are relative to `P0²`. A silent signal band gives `-inf`; a
/// band with nothing in the denominator gives `+inf`.
pub fn band_snr(signal: &BandSpectrum, noise: &BandSpectrum, hearing: HearingModel) -> BandSpectrum {
    let signal = signal.to_energy();
    let noise = noise.to_energy();
    let masking = if hearing.masking {
        masking_intensity(&signal.add_energy(&noise))
    } else {
        BandSpectrum::zero_energy()
    };
    BandSpectrum::db(std::array::from_fn(|k| {
        let s = signal.values[k];
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let threshold = if hearing.threshold { 10f64.powf(THRESHOLD_DB[k] / 10.0) } else { 0.0 };
        let denom = noise.values[k] + masking.values[k] + threshold;
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            10.0 * (s / denom).log10()
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_noise_is_infinite_snr() {
        let snr = band_snr(&BandSpectrum::energy([1e5; NUM_BANDS]), &BandSpectrum::zero_energy(), HearingModel::NONE);
        assert!(snr.values.iter().all(|v| *v == f64::INFINITY));
    }

    #[test]
    fn equal_signal_and_noise_is_zero_db() {
        let s = BandSpectrum::energy([1e6; NUM_BANDS]);
        let snr = band_snr(&s, &s, HearingModel::NONE);
        assert!(snr.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn doubling_signal_adds_three_db() {
        let s = BandSpectrum::db([65.0, 62.0, 60.0, 55.0, 50.0, 45.0, 40.0]);
        let n = BandSpectrum::db([50.0; NUM_BANDS]);
        let a = band_snr(&s, &n, HearingModel::NONE);
        let b = band_snr(&s.to_energy().scale_energy(&BandSpectrum::energy([2.0; NUM_BANDS])), &n, HearingModel::NONE);
        for k in 0..NUM_BANDS {
            assert!((b.values[k] - a.values[k] - 10.0 * 2f64.log10()).abs() < 1e-9);
        }
    }

    #[test]
    fn silent_signal_band_is_negative_infinity() {
        let mut s = [1e4; NUM_BANDS];
        s[2] = 0.0;
        let snr = band_snr(&BandSpectrum::energy(s), &BandSpectrum::energy([1.0; NUM_BANDS]), HearingModel::STANDARD);
        assert_eq!(snr.values[2], f64::NEG_INFINITY);
    }

    #[test]
    fn masking_slope_is_continuous() {
        for l in [63.0, 67.0] {
            assert!((masking_slope_db(l - 1e-9) - masking_slope_db(l)).abs() < 1e-6);
        }
        // The lowest band has no band below it.
        let m = masking_intensity(&BandSpectrum::db([80.0; NUM_BANDS]));
        assert_eq!(m.values[0], 0.0);
        assert!((10.0 * m.values[1].log10() - (80.0 + 0.5 * 80.0 - 59.8)).abs() < 1e-9);
    }

    #[test]
    fn threshold_dominates_quiet_speech() {
        // 40 dB speech in the 125 Hz band is below the 46 dB threshold.
        let snr = band_snr(&BandSpectrum::db([40.0; NUM_BANDS]), &BandSpectrum::zero_energy(), HearingModel::STANDARD);
        assert!(snr.values[0] < 0.0);
        assert!(snr.values[3] > 20.0);
    }
}
