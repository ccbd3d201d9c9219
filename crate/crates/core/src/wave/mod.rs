//! Low-frequency FDTD solver (second-order leapfrog on a uniform grid) and
//! reciprocal multi-probe impulse responses.

mod grid;
mod run;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use grid::{build_grid, impedance_from_absorption, random_incidence_absorption, CellClass, SimGrid, COURANT_SAFETY, RECOMMENDED_PPW};
pub use run::{field_snapshot, run_wave, run_wave_with, FieldSnapshot, Pulse, WaveField, WaveResult};

use crate::dsp;
use crate::error::Result;
use crate::geometry::Vec3;
use crate::rir::ImpulseResponse;
use crate::scene::Scene;

/// Start time of every wave-band response; leaves room for the acausal
/// ringing of the band-limited deconvolution.
pub const WAVE_T0: f64 = -0.016;
/// Tikhonov regularization relative to the peak pulse spectrum magnitude.
pub const DECONVOLUTION_EPS: f64 = 1e-6;
/// Longest raised-cosine fade applied to the end of a trace before deconvolution, s.
pub const TAIL_TAPER: f64 = 0.05;
/// Corner of the low cut applied with the deconvolution, Hz. The pulse holds
/// almost no energy down there, so the division would only amplify noise.
pub const LOW_CUT_HZ: f64 = 25.0;

/// Steepness of the band limit: power response `1 / (1 + (f/f_max)^BAND_LIMIT_POWER)`.
pub const BAND_LIMIT_POWER: i32 = 16;

/// Recovers the impulse response from a trace by regularized spectral
/// division by the pulse, band-limited to `[LOW_CUT_HZ, f_max]`, then
/// resamples it to `sample_rate` on a grid starting at `t0` with `len` samples.
pub fn deconvolve(trace: &[f64], forcing: &[f64], dt: f64, f_max: f64, sample_rate: f64, t0: f64, len: usize) -> ImpulseResponse {
    let n = dsp::next_pow2(2 * trace.len().max(forcing.len()));
    let y = dsp::forward(&taper_tail(trace, ((TAIL_TAPER / dt).round() as usize).min(trace.len() / 10)), n);
    let s = dsp::forward(forcing, n);
    let peak = s.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let eps2 = (DECONVOLUTION_EPS * peak).powi(2);
    let mut h_spec: Vec<_> = y
        .iter()
        .zip(&s)
        .map(|(yk, sk)| if peak > 0.0 { yk * sk.conj() / (sk.norm_sqr() + eps2) } else { *yk * 0.0 })
        .collect();
    dsp::apply_gain(&mut h_spec, 1.0 / dt, |f| {
        let low = (f / LOW_CUT_HZ).powi(8);
        let high = (f / f_max).powi(BAND_LIMIT_POWER);
        low / (1.0 + low) / (1.0 + high)
    });
    let h = dsp::inverse_real(&h_spec);

    // Unwrap negative times from the end of the circular result.
    let pre = ((-t0).max(0.0) / dt).ceil() as usize + 3;
    let pre = pre.min(n / 2);
    let mut ext = Vec::with_capacity(pre + trace.len() + 3);
    ext.extend_from_slice(&h[n - pre..]);
    ext.extend_from_slice(&h[..(trace.len() + 3).min(n - pre)]);
    let scale = 1.0 / (sample_rate * dt);
    let samples = (0..len)
        .map(|j| {
            let t = t0 + j as f64 / sample_rate;
            scale * dsp::cubic_at(&ext, t / dt + pre as f64)
        })
        .collect();
    ImpulseResponse::new(samples, sample_rate).with_t0(t0)
}

/// Fades the last `n` samples out with a half cosine.
fn taper_tail(trace: &[f64], n: usize) -> Vec<f64> {
    let mut y = trace.to_vec();
    let start = trace.len() - n;
    for (i, v) in y[start..].iter_mut().enumerate() {
        *v *= 0.5 * (1.0 + (std::f64::consts::PI * (i + 1) as f64 / n as f64).cos());
    }
    y
}

/// Grid plus run bookkeeping for repeated evaluations in one scene.
#[derive(Debug)]
pub struct WaveSolver {
    grid: SimGrid,
    sample_rate: f64,
    duration: f64,
    runs: AtomicUsize,
}

impl WaveSolver {
    pub fn new(scene: &Scene) -> Result<Self> {
        let p = &scene.physics;
        let grid = build_grid(scene, p.wave_max_hz, p.points_per_wavelength)?;
        Ok(Self { grid, sample_rate: p.sample_rate, duration: p.rir_duration, runs: AtomicUsize::new(0) })
    }

    pub fn grid(&self) -> &SimGrid {
        &self.grid
    }

    /// Number of simulations run so far.
    pub fn runs(&self) -> usize {
        self.runs.load(Ordering::Relaxed)
    }

    /// Low-band responses `h(s_i, listener)` for every source point from one
    /// simulation emitted at the listener.
    pub fn rirs(&self, listener: Vec3, sources: &[Vec3]) -> Result<Vec<ImpulseResponse>> {
        let pulse = Pulse::band_limited(self.grid.f_max);
        let result = run_wave_with(&self.grid, listener, self.duration + pulse.length(), sources, &pulse)?;
        self.runs.fetch_add(1, Ordering::Relaxed);
        let len = ((self.duration - WAVE_T0) * self.sample_rate).round() as usize;
        Ok(result
            .traces
            .iter()
            .map(|trace| deconvolve(trace, &result.forcing, result.dt, self.grid.f_max, self.sample_rate, WAVE_T0, len))
            .collect())
    }
}

/// One-shot [`WaveSolver::rirs`] for a scene.
pub fn wave_rirs(scene: &Scene, listener: Vec3, source_points: &[Vec3]) -> Result<Vec<ImpulseResponse>> {
    WaveSolver::new(scene)?.rirs(listener, source_points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Material;

    fn small_room(alpha: f64) -> Scene {
        let mut s = Scene::shoebox(Vec3::new(1.2, 1.0, 0.9), Material::uniform("m", alpha, 0.1));
        s.physics.rir_duration = 0.05;
        s
    }

    #[test]
    fn grid_spacing_and_dims() {
        let s = Scene::shoebox(Vec3::new(4.0, 3.0, 2.5), Material::uniform("m", 0.1, 0.1));
        let g = build_grid(&s, 500.0, 8.0).unwrap();
        assert!((g.spacing - 0.08575).abs() < 1e-12);
        assert_eq!(g.dims, [47, 35, 30]);
        assert!(g.dt <= g.spacing / (g.c * 3f64.sqrt()));
        assert!((g.courant() - 0.9 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let s = small_room(0.1);
        assert!(build_grid(&s, 0.0, 8.0).is_err());
    }

    #[test]
    fn cell_cap_is_enforced() {
        let mut s = small_room(0.1);
        s.physics.max_cells = 100;
        assert!(matches!(build_grid(&s, 500.0, 8.0), Err(crate::Error::Grid(_))));
    }

    #[test]
    fn walls_mark_boundary_cells() {
        let s = small_room(0.1);
        let g = build_grid(&s, 500.0, 8.0).unwrap();
        assert_eq!(g.cell_class(0, 3, 3), CellClass::Boundary(Some(0)));
        assert_eq!(g.cell_class(5, 5, 5), CellClass::Air);
        assert_eq!(g.dims, [14, 12, 11]);
        // The last z layer of centres sits just above the 0.9 m ceiling.
        assert_eq!(g.cell_class(5, 5, 10), CellClass::Solid);
        assert_eq!(g.air_node_count(), 14 * 12 * 10);
    }

    #[test]
    fn zero_amplitude_gives_silence() {
        let s = small_room(0.1);
        let g = build_grid(&s, 500.0, 8.0).unwrap();
        let pulse = Pulse::band_limited(500.0).with_amplitude(0.0);
        let r = run_wave_with(&g, Vec3::new(0.3, 0.4, 0.4), 0.02, &[Vec3::new(0.9, 0.5, 0.5)], &pulse).unwrap();
        assert!(r.traces[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn impedance_reproduces_diffuse_absorption() {
        assert!((random_incidence_absorption(11.2) - 0.453773).abs() < 1e-5);
        assert_eq!(impedance_from_absorption(0.0), f64::INFINITY);
        for alpha in [0.01, 0.1, 0.3, 0.6, 0.9] {
            let xi = impedance_from_absorption(alpha);
            assert!((random_incidence_absorption(xi) - alpha).abs() < 1e-9, "{alpha}");
        }
        assert!((random_incidence_absorption(impedance_from_absorption(1.0)) - 0.951222).abs() < 1e-5);
    }

    #[test]
    fn pulse_is_60_db_down_at_f_max() {
        let p = Pulse::band_limited(500.0);
        assert!((p.sigma - 1.44004e-3).abs() < 1e-8);
        let spectrum = |f: f64| {
            let x = (2.0 * std::f64::consts::PI * f * p.sigma).powi(2);
            x * (-x / 2.0).exp()
        };
        let peak = spectrum(2f64.sqrt() / (2.0 * std::f64::consts::PI * p.sigma));
        assert!((spectrum(500.0) / peak - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn one_run_serves_every_probe() {
        let s = small_room(0.3);
        let solver = WaveSolver::new(&s).unwrap();
        let probes: Vec<Vec3> = (0..10).map(|i| Vec3::new(0.2 + 0.08 * i as f64, 0.5, 0.45)).collect();
        let rirs = solver.rirs(Vec3::new(0.3, 0.3, 0.3), &probes).unwrap();
        assert_eq!(rirs.len(), 10);
        assert_eq!(solver.runs(), 1);
        assert!(rirs.iter().all(|h| h.is_finite() && h.t0 == WAVE_T0));
    }

    #[test]
    fn snapshot_header_layout() {
        let s = small_room(0.3);
        let g = build_grid(&s, 500.0, 8.0).unwrap();
        let snap = field_snapshot(&g, Vec3::new(0.6, 0.5, 0.45), 0.004).unwrap();
        let mut buf = Vec::new();
        snap.write_raw(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"EPWF");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize, g.dims[0]);
        assert_eq!(buf.len(), 4 + 4 + 12 + 12 + 4 * g.node_count());
        assert!(snap.values.iter().any(|&v| v != 0.0));
    }
}
