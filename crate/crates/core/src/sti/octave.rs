use std::cell::RefCell;

use crate::bands::{band_edges, highest_band_edge, BandSpectrum, NUM_BANDS};
use crate::dsp;
use crate::error::{Error, Result};
use crate::rir::ImpulseResponse;

/// Prototype order 3, i.e. a 6th-order bandpass.
const PROTOTYPE_ORDER: i32 = 3;

/// Longest stretch of the zero-phase filter response kept ahead of the input, s.
pub const PRE_ROLL: f64 = 0.1;

/// Octave-band components of one impulse response.
#[derive(Debug, Clone)]
pub struct OctaveBands {
    /// Each band starts `pre_roll` samples ahead of the input.
    pub bands: [Vec<f64>; NUM_BANDS],
    pub sample_rate: f64,
    pub pre_roll: usize,
}

impl OctaveBands {
    pub fn band(&self, k: usize) -> &[f64] {
        &self.bands[k]
    }

    pub fn energies(&self) -> [f64; NUM_BANDS] {
        std::array::from_fn(|k| self.bands[k].iter().map(|x| x * x).sum())
    }

    /// Band energy relative to that of a unit impulse, i.e. the intensity
    /// gain against a free-field source heard at 1 m.
    pub fn gains(&self) -> BandSpectrum {
        let reference = band_reference_energy(self.sample_rate);
        let e = self.energies();
        BandSpectrum::energy(std::array::from_fn(|k| e[k] / reference[k]))
    }
}

/// Zero-phase 6th-order Butterworth octave-band split. Each band holds the
/// input's span plus up to [`PRE_ROLL`] of the filter response ahead of it,
/// so energy near the first sample is not lost.
pub fn octave_filter(h: &ImpulseResponse) -> Result<OctaveBands> {
    let fs = h.sample_rate;
    if fs < 2.0 * highest_band_edge() {
        return Err(Error::InvalidArgument(format!(
            "sample rate {fs} Hz is below twice the 8 kHz band edge ({:.0} Hz)",
            2.0 * highest_band_edge()
        )));
    }
    let len = h.len();
    if len == 0 {
        return Ok(OctaveBands { bands: std::array::from_fn(|_| Vec::new()), sample_rate: fs, pre_roll: 0 });
    }
    let n = dsp::next_pow2(2 * len);
    let pre_roll = ((PRE_ROLL * fs) as usize).min((n - len) / 2);
    let spectrum = dsp::forward(&h.samples, n);
    let bands = std::array::from_fn(|k| {
        let (lo, hi) = band_edges(k);
        let mut s = spectrum.clone();
        dsp::apply_gain(&mut s, fs, |f| dsp::butterworth_bandpass_magnitude(f, lo, hi, PROTOTYPE_ORDER));
        let y = dsp::inverse_real(&s);
        let mut band = Vec::with_capacity(pre_roll + len);
        band.extend_from_slice(&y[n - pre_roll..]);
        band.extend_from_slice(&y[..len]);
        band
    });
    Ok(OctaveBands { bands, sample_rate: fs, pre_roll })
}

thread_local! {
    static REFERENCE: RefCell<Option<(u64, [f64; NUM_BANDS])>> = const { RefCell::new(None) };
}

/// Energy each band filter passes from a unit impulse: `(2/fs)·∫₀^{fs/2} |H_k(f)|² df`.
pub fn band_reference_energy(fs: f64) -> [f64; NUM_BANDS] {
    REFERENCE.with(|cache| {
        if let Some((key, v)) = *cache.borrow() {
            if key == fs.to_bits() {
                return v;
            }
        }
        let v = std::array::from_fn(|k| {
            let (lo, hi) = band_edges(k);
            // Simpson's rule; the integrand is smooth at this resolution.
            let steps = 16384;
            let top = fs / 2.0;
            let dx = top / steps as f64;
            let g = |f: f64| dsp::butterworth_bandpass_magnitude(f, lo, hi, PROTOTYPE_ORDER).powi(2);
            let mut acc = g(0.0) + g(top);
            for i in 1..steps {
                acc += g(i as f64 * dx) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            2.0 / fs * acc * dx / 3.0
        });
        *cache.borrow_mut() = Some((fs.to_bits(), v));
        v
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::bands::BAND_CENTERS_HZ;

    const FS: f64 = 32000.0;

    #[test]
    fn tone_burst_lands_in_its_band() {
        // 200 ms Hann-windowed 1 kHz burst.
        let n = (0.2 * FS) as usize;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos();
                w * (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / FS).sin()
            })
            .collect();
        let bands = octave_filter(&ImpulseResponse::new(x, FS)).unwrap();
        let e = bands.energies();
        let total: f64 = e.iter().sum();
        assert!(e[3] / total >= 0.95, "fraction in 1 kHz band: {}", e[3] / total);
    }

    #[test]
    fn zero_input_gives_zero_bands() {
        let bands = octave_filter(&ImpulseResponse::zeros(1000, FS)).unwrap();
        for b in &bands.bands {
            assert_eq!(b.len(), 1000 + bands.pre_roll);
            assert!(b.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn white_noise_energy_follows_bandwidth() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..(10.0 * FS) as usize).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bands = octave_filter(&ImpulseResponse::new(x, FS)).unwrap();
        let e = bands.energies();
        // Oracle: octave bandwidth is fc/√2 for every band.
        let per_hz: Vec<f64> = (0..NUM_BANDS).map(|k| e[k] / (BAND_CENTERS_HZ[k] / 2f64.sqrt())).collect();
        let mean = per_hz.iter().sum::<f64>() / NUM_BANDS as f64;
        for (k, v) in per_hz.iter().enumerate() {
            assert!((v / mean - 1.0).abs() < 0.10, "band {k}: {}", v / mean);
        }
    }

    #[test]
    fn low_sample_rate_is_rejected() {
        assert!(octave_filter(&ImpulseResponse::zeros(10, 16000.0)).is_err());
    }

    #[test]
    fn free_field_gain_is_inverse_square() {
        // Direct path at 2 m, 20 ms delay: gain 1/4 in every band.
        let mut h = ImpulseResponse::zeros(16000, FS);
        h.samples[640] = 0.5;
        let g = octave_filter(&h).unwrap().gains();
        for k in 0..NUM_BANDS {
            assert!((g.values[k] - 0.25).abs() < 0.25 * 0.02, "band {k}: {}", g.values[k]);
        }
    }
}
