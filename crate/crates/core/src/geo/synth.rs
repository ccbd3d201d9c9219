use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use super::{EnergyHistogram, ImagePath};
use crate::bands::{BAND_CENTERS_HZ, NUM_BANDS};
use crate::dsp;
use crate::error::{Error, Result};
use crate::rir::ImpulseResponse;

/// Image-source impulses cover this leading part of the response, s.
pub const EARLY_WINDOW: f64 = 0.08;

/// Crossfade weights between adjacent octave bands, triangular in
/// log-frequency; they sum to 1 at every frequency.
pub fn band_partition(f: f64) -> [f64; NUM_BANDS] {
    let mut w = [0.0; NUM_BANDS];
    if f <= BAND_CENTERS_HZ[0] {
        w[0] = 1.0;
    } else if f >= BAND_CENTERS_HZ[NUM_BANDS - 1] {
        w[NUM_BANDS - 1] = 1.0;
    } else {
        let k = BAND_CENTERS_HZ.iter().rposition(|&c| c <= f).unwrap_or(0);
        let r = (f / BAND_CENTERS_HZ[k]).log2();
        w[k] = 1.0 - r;
        w[k + 1] = r;
    }
    w
}

/// Sums per-band signals after shaping band `k` by `shape(k, f)`.
fn combine_bands(bands: &[Vec<f64>; NUM_BANDS], fs: f64, len: usize, shape: impl Fn(usize, f64) -> f64) -> Vec<f64> {
    let n = dsp::next_pow2(2 * len.max(1));
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for (k, x) in bands.iter().enumerate() {
        if x.iter().all(|&v| v == 0.0) {
            continue;
        }
        let spec = dsp::forward(x, n);
        for (j, (a, s)) in acc.iter_mut().zip(&spec).enumerate() {
            *a += s * shape(k, dsp::bin_frequency(j, n, fs));
        }
    }
    let mut y = dsp::inverse_real(&acc);
    y.truncate(len);
    y
}

fn path_bands(paths: &[ImagePath], fs: f64, len: usize) -> [Vec<f64>; NUM_BANDS] {
    let mut bands: [Vec<f64>; NUM_BANDS] = std::array::from_fn(|_| vec![0.0; len]);
    for p in paths {
        let i = (p.time * fs).round() as usize;
        if i < len {
            for (b, a) in bands.iter_mut().zip(&p.amplitude) {
                b[i] += a;
            }
        }
    }
    bands
}

/// Renders specular paths as band-weighted impulses at the nearest sample.
/// A path with equal amplitude in every band becomes a plain unit impulse.
pub fn render_paths(paths: &[ImagePath], fs: f64, len: usize) -> ImpulseResponse {
    let bands = path_bands(paths, fs, len);
    let samples = combine_bands(&bands, fs, len, |k, f| band_partition(f)[k]);
    ImpulseResponse::new(samples, fs)
}

/// Fraction of white-noise power that passes `sqrt(W_k)`, per band. The
/// fractions sum to 1.
fn noise_pass_fraction(fs: f64) -> [f64; NUM_BANDS] {
    let steps = 20_000;
    let mut acc = [0.0; NUM_BANDS];
    for i in 0..steps {
        let f = (i as f64 + 0.5) / steps as f64 * fs / 2.0;
        for (a, w) in acc.iter_mut().zip(band_partition(f)) {
            *a += w;
        }
    }
    acc.map(|a| a / steps as f64)
}

/// High-band pressure response from an energy histogram. Bins inside
/// [`EARLY_WINDOW`] hold the image-source impulses plus noise for whatever
/// energy they do not explain; later bins are pure noise. Noise is seeded and
/// independent per band. Histogram energies are broadband-equivalent (a unit
/// impulse has energy 1 in every band), so band `k` of the output carries the
/// share of its histogram energy that falls inside the band's crossfade
/// weights, as a filtered white response would.
pub fn histogram_to_rir(hist: &EnergyHistogram, early: &[ImagePath], sample_rate: f64, seed: u64) -> Result<ImpulseResponse> {
    if hist.bin_width * sample_rate < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "bin width {} s is shorter than one sample at {sample_rate} Hz",
            hist.bin_width
        )));
    }
    let len = (hist.duration() * sample_rate).round() as usize;
    let early: Vec<ImagePath> = early.iter().filter(|p| p.time < EARLY_WINDOW).cloned().collect();
    let mut early_energy: [Vec<f64>; NUM_BANDS] = std::array::from_fn(|_| vec![0.0; hist.bins()]);
    for p in &early {
        let b = (p.time / hist.bin_width) as usize;
        if b < hist.bins() {
            for (band, a) in early_energy.iter_mut().zip(&p.amplitude) {
                band[b] += a * a;
            }
        }
    }

    let pass = noise_pass_fraction(sample_rate);
    let amp = 3f64.sqrt();
    let mut samples = vec![0.0; len];
    for k in 0..NUM_BANDS {
        let mut band = vec![0.0; len];
        let mut target = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64 + 1);
        for (b, &e) in hist.energy[k].iter().enumerate() {
            let residual = (e - early_energy[k][b]).max(0.0);
            let start = ((b as f64 * hist.bin_width) * sample_rate).round() as usize;
            let end = (((b + 1) as f64 * hist.bin_width) * sample_rate).round().min(len as f64) as usize;
            if residual <= 0.0 || end <= start {
                continue;
            }
            target += residual;
            let scale = (residual / (end - start) as f64).sqrt();
            for x in &mut band[start..end] {
                *x = scale * rng.random_range(-amp..amp);
            }
        }
        if target <= 0.0 {
            continue;
        }
        let shaped = dsp::zero_phase(&band, sample_rate, |f| band_partition(f)[k].sqrt());
        let energy: f64 = shaped.iter().map(|x| x * x).sum();
        if energy > 0.0 {
            let g = (target * pass[k] / energy).sqrt();
            for (y, x) in samples.iter_mut().zip(&shaped) {
                *y += g * x;
            }
        }
    }
    let paths = path_bands(&early, sample_rate, len);
    let direct = combine_bands(&paths, sample_rate, len, |k, f| band_partition(f)[k]);
    for (y, d) in samples.iter_mut().zip(&direct) {
        *y += d;
    }
    Ok(ImpulseResponse::new(samples, sample_rate))
}
