//! Crossover of wave and geometric bands, and auralization by convolution.

use crate::dsp;
use crate::error::{Error, Result};
use crate::rir::ImpulseResponse;

/// Default crossover frequency, Hz.
pub const DEFAULT_CROSSOVER_HZ: f64 = 500.0;

/// Merges the two bands with a zero-phase Linkwitz-Riley pair:
/// `H = |B_lp|²·H_wave + |B_hp|²·H_geo`, where `B` are 2nd-order Butterworth
/// responses at `f_c`. Inputs are first aligned to the earlier `t0`; the
/// output spans the longer of the two.
pub fn crossover_combine(h_wave: &ImpulseResponse, h_geo: &ImpulseResponse, f_c: f64) -> Result<ImpulseResponse> {
    h_wave.check_same_rate(h_geo)?;
    if !(f_c >= 0.0) {
        return Err(Error::InvalidArgument(format!("crossover frequency {f_c} must be nonnegative")));
    }
    let fs = h_wave.sample_rate;
    let t0 = h_wave.t0.min(h_geo.t0);
    let w = h_wave.aligned_to(t0);
    let g = h_geo.aligned_to(t0);
    let len = w.len().max(g.len());
    if len == 0 {
        return Ok(ImpulseResponse::new(Vec::new(), fs).with_t0(t0));
    }
    let n = dsp::next_pow2(w.len() + g.len());
    let mut sw = dsp::forward(&w.samples, n);
    let sg = dsp::forward(&g.samples, n);
    for (k, (a, b)) in sw.iter_mut().zip(&sg).enumerate() {
        let f = dsp::bin_frequency(k, n, fs);
        *a = *a * dsp::butterworth2_lowpass_power(f, f_c) + b * dsp::butterworth2_highpass_power(f, f_c);
    }
    let mut y = dsp::inverse_real(&sw);
    // The zero-phase filters ring slightly ahead of t0; that part wraps to the end and is dropped.
    y.truncate(len);
    Ok(ImpulseResponse::new(y, fs).with_t0(t0))
}

/// Received signal `h ⊛ clip`, length `len(h) + len(clip) - 1`. The clip must
/// already be at the response's sample rate.
pub fn convolve_clip(h: &ImpulseResponse, clip: &[f64]) -> Result<Vec<f64>> {
    if clip.is_empty() {
        return Err(Error::InvalidArgument("clip is empty".into()));
    }
    if h.is_empty() {
        return Err(Error::InvalidArgument("impulse response is empty".into()));
    }
    Ok(dsp::convolve(&h.samples, clip))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn zero_geometric_branch_leaves_the_lowpassed_wave() {
        let fs = 32000.0;
        let w = ImpulseResponse::new(noise(256, 1), fs);
        let out = crossover_combine(&w, &ImpulseResponse::zeros(256, fs), 500.0).unwrap();
        let want = dsp::zero_phase(&w.samples, fs, |f| dsp::butterworth2_lowpass_power(f, 500.0));
        // Both are the same filter; only the padding length differs.
        let err: f64 = out.samples.iter().zip(&want).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 0.05 * want.iter().map(|x| x * x).sum::<f64>().sqrt(), "{err}");
    }

    #[test]
    fn identical_branches_pass_unchanged() {
        let fs = 32000.0;
        let h = ImpulseResponse::new(noise(300, 2), fs);
        let out = crossover_combine(&h, &h, 500.0).unwrap();
        for (a, b) in out.samples.iter().zip(&h.samples) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_rates_are_rejected() {
        let a = ImpulseResponse::zeros(4, 32000.0);
        let b = ImpulseResponse::zeros(4, 44100.0);
        assert!(matches!(crossover_combine(&a, &b, 500.0), Err(Error::SampleRateMismatch(..))));
    }

    #[test]
    fn origins_are_aligned_before_mixing() {
        let fs = 1000.0;
        let w = ImpulseResponse::delta(20, fs, 0.005).with_t0(-0.004);
        let g = ImpulseResponse::delta(20, fs, 0.003);
        let out = crossover_combine(&w, &g, 0.0).unwrap();
        assert_eq!(out.t0, -0.004);
        let peak = out.peak_index().unwrap();
        assert!((out.time_of(peak) - 0.003).abs() < 1e-9);
    }

    #[test]
    fn identity_and_shift_kernels() {
        let clip = noise(50, 3);
        let id = convolve_clip(&ImpulseResponse::delta(1, 8000.0, 0.0), &clip).unwrap();
        assert_eq!(id.len(), clip.len());
        for (a, b) in id.iter().zip(&clip) {
            assert!((a - b).abs() < 1e-12);
        }
        let shifted = convolve_clip(&ImpulseResponse::delta(101, 8000.0, 100.0 / 8000.0), &clip).unwrap();
        assert_eq!(shifted.len(), 150);
        for (i, b) in clip.iter().enumerate() {
            assert!((shifted[i + 100] - b).abs() < 1e-12);
        }
        assert!(shifted[..100].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn empty_clip_is_an_error() {
        assert!(convolve_clip(&ImpulseResponse::delta(4, 8000.0, 0.0), &[]).is_err());
    }
}
