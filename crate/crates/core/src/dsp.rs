//! FFT plumbing shared by the filters, the crossover and the deconvolution.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Forward DFT of `x` zero-padded to `n` points.
pub fn forward(x: &[f64], n: usize) -> Vec<Complex64> {
    assert!(x.len() <= n, "signal longer than transform");
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    plan(n, false).process(&mut buf);
    buf
}

/// Inverse DFT returning the (scaled) real part.
pub fn inverse_real(spectrum: &[Complex64]) -> Vec<f64> {
    let n = spectrum.len();
    let mut buf = spectrum.to_vec();
    plan(n, true).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Frequency in Hz of DFT bin `k` of an `n`-point transform, folded to `[0, fs/2]`.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let k = if k <= n / 2 { k } else { n - k };
    k as f64 * fs / n as f64
}

/// Multiplies every bin by a real gain of its (folded) frequency.
pub fn apply_gain(spectrum: &mut [Complex64], fs: f64, gain: impl Fn(f64) -> f64) {
    let n = spectrum.len();
    for (k, c) in spectrum.iter_mut().enumerate() {
        *c *= gain(bin_frequency(k, n, fs));
    }
}

/// Zero-phase filtering by a real magnitude response. The output has the
/// input's length; the acausal part of the filter response ahead of sample 0
/// is dropped.
pub fn zero_phase(x: &[f64], fs: f64, gain: impl Fn(f64) -> f64) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let n = next_pow2(2 * x.len());
    let mut spec = forward(x, n);
    apply_gain(&mut spec, fs, gain);
    let mut y = inverse_real(&spec);
    y.truncate(x.len());
    y
}

/// Linear convolution via FFT; length `a.len() + b.len() - 1`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    let n = next_pow2(len);
    let fa = forward(a, n);
    let fb = forward(b, n);
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let mut y = inverse_real(&prod);
    y.truncate(len);
    y
}

/// Squared magnitude of a 2nd-order Butterworth lowpass, `1 / (1 + (f/fc)^4)`.
pub fn butterworth2_lowpass_power(f: f64, fc: f64) -> f64 {
    if fc <= 0.0 {
        return if f <= 0.0 { 1.0 } else { 0.0 };
    }
    let r = (f / fc).powi(4);
    if r.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + r)
    }
}

/// Squared magnitude of the matching highpass, `(f/fc)^4 / (1 + (f/fc)^4)`.
pub fn butterworth2_highpass_power(f: f64, fc: f64) -> f64 {
    1.0 - butterworth2_lowpass_power(f, fc)
}

/// Magnitude of an analog Butterworth bandpass with prototype order
/// `prototype_order` (filter order twice that) and edges `lo`, `hi`.
pub fn butterworth_bandpass_magnitude(f: f64, lo: f64, hi: f64, prototype_order: i32) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    let f0_sq = lo * hi;
    let bw = hi - lo;
    let x = (f * f - f0_sq) / (f * bw);
    (1.0 / (1.0 + x.powi(2 * prototype_order))).sqrt()
}

/// Catmull-Rom interpolation of `x` at fractional index `pos`; zero outside the signal.
pub fn cubic_at(x: &[f64], pos: f64) -> f64 {
    let i = pos.floor();
    let t = pos - i;
    let i = i as i64;
    let get = |k: i64| if k >= 0 && (k as usize) < x.len() { x[k as usize] } else { 0.0 };
    let (p0, p1, p2, p3) = (get(i - 1), get(i), get(i + 1), get(i + 2));
    p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
}

/// Resamples from `from_hz` to `to_hz` by cubic interpolation.
pub fn resample(x: &[f64], from_hz: f64, to_hz: f64) -> Vec<f64> {
    if (from_hz - to_hz).abs() < 1e-9 {
        return x.to_vec();
    }
    let step = from_hz / to_hz;
    let len = ((x.len() as f64) / step).round() as usize;
    (0..len).map(|j| cubic_at(x, j as f64 * step)).collect()
}
