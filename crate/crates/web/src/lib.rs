//! Browser bindings for the interactive demo page in `www/`.
//!
//! Three operations are exposed: crossover response curves, the modulation
//! transfer and STI of an exponentially decaying room under noise, and an STI
//! field plus annealed placement in a shoebox room.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

use echoplace::anneal::{anneal, AnnealParams};
use echoplace::dsp::{butterworth2_highpass_power, butterworth2_lowpass_power};
use echoplace::geo::{geometric_rir, GeoContext};
use echoplace::placement::{sample_listeners_with, Stratification};
use echoplace::scene::{Material, NoiseSource};
use echoplace::sti::{mtf, sti_for_source, sti_from_mtf, MtfMatrix, MALE, MODULATION_FREQS_HZ, NUM_MOD_FREQS};
use echoplace::{Aabb, BandSpectrum, ImpulseResponse, Scene, Vec3, NUM_BANDS};

fn to_js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `points` log-spaced frequencies from 20 Hz to 20 kHz, flattened as
/// `[f, low_db, high_db, sum_db]` per point.
#[wasm_bindgen]
pub fn crossover_curves(crossover_hz: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    let mut out = Vec::with_capacity(4 * n);
    for i in 0..n {
        let f = 20.0 * 1000f64.powf(i as f64 / (n - 1) as f64);
        let lo = butterworth2_lowpass_power(f, crossover_hz);
        let hi = butterworth2_highpass_power(f, crossover_hz);
        out.extend([f, 20.0 * lo.log10(), 20.0 * hi.max(1e-30).log10(), 20.0 * (lo + hi).log10()]);
    }
    out
}

/// Modulation frequencies of the transfer function, Hz.
#[wasm_bindgen]
pub fn modulation_frequencies() -> Vec<f64> {
    MODULATION_FREQS_HZ.to_vec()
}

/// Transfer of an exponential energy decay with reverberation time `t60` at
/// a flat band SNR of `snr_db`. Returns the 14 modulation ratios followed by
/// the resulting STI.
#[wasm_bindgen]
pub fn decay_mtf(t60: f64, snr_db: f64) -> Result<Vec<f64>, JsError> {
    decay_transfer(t60, snr_db).map_err(to_js)
}

fn decay_transfer(t60: f64, snr_db: f64) -> Result<Vec<f64>, &'static str> {
    if !(t60 > 0.0) {
        return Err("T60 must be positive");
    }
    let fs = 8000.0;
    let len = (fs * (1.5 * t60).max(0.2)) as usize;
    let h: Vec<f64> = (0..len).map(|i| (-6.907755278982137 * i as f64 / fs / t60).exp()).collect();
    let m = mtf(&h, fs, snr_db);
    let matrix = MtfMatrix { m: [m; NUM_BANDS] };
    let mut out = m.to_vec();
    out.push(sti_from_mtf(&matrix, &MALE).sti);
    debug_assert_eq!(out.len(), NUM_MOD_FREQS + 1);
    Ok(out)
}

/// A closed rectangular room with one speech source and an optional noise source.
#[wasm_bindgen]
pub struct ShoeboxDemo {
    scene: Scene,
    ctx: GeoContext,
    source: Vec3,
    height: f64,
}

#[wasm_bindgen]
impl ShoeboxDemo {
    /// Room of `width × depth × 2.5 m` with uniform `absorption`; the speech
    /// source sits at `(source_x, source_y, 1.2)`, a noise source of
    /// `noise_db` at `(noise_x, noise_y, 1.0)`.
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        width: f64,
        depth: f64,
        absorption: f64,
        source_x: f64,
        source_y: f64,
        noise_x: f64,
        noise_y: f64,
        noise_db: f64,
    ) -> Result<ShoeboxDemo, JsError> {
        Self::build(width, depth, absorption, (source_x, source_y), (noise_x, noise_y), noise_db).map_err(to_js)
    }

    fn build(
        width: f64,
        depth: f64,
        absorption: f64,
        (source_x, source_y): (f64, f64),
        (noise_x, noise_y): (f64, f64),
        noise_db: f64,
    ) -> Result<ShoeboxDemo, &'static str> {
        if !(width > 0.5 && depth > 0.5) || !(0.0..=1.0).contains(&absorption) {
            return Err("room must exceed 0.5 m and absorption must lie in [0, 1]");
        }
        let height = 2.5;
        let mut scene = Scene::shoebox(Vec3::new(width, depth, height), Material::uniform("walls", absorption, 0.2));
        scene.physics.wave = false;
        scene.physics.rays = 600;
        scene.physics.rir_duration = 0.4;
        scene.physics.sample_rate = 24000.0;
        let clamp = |v: f64, hi: f64| v.clamp(0.1, hi - 0.1);
        let source = Vec3::new(clamp(source_x, width), clamp(source_y, depth), 1.2);
        scene.noise.push(NoiseSource {
            position: Vec3::new(clamp(noise_x, width), clamp(noise_y, depth), 1.0),
            spectrum: [noise_db; NUM_BANDS],
        });
        scene.listener_boxes.push(Aabb::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(width, depth, 1.0)));
        let ctx = GeoContext::new(&scene);
        Ok(ShoeboxDemo { scene, ctx, source, height })
    }

    fn response(&self, from: Vec3, to: Vec3, seed: u64) -> echoplace::Result<ImpulseResponse> {
        geometric_rir(&self.scene, &self.ctx, from, to, seed)
    }

    fn sti_at(&self, p: Vec3) -> echoplace::Result<f64> {
        let noise = &self.scene.noise[0];
        let hn = self.response(noise.position, p, 2)?;
        let gains = echoplace::sti::octave_filter(&hn)?.gains();
        let n = noise.level().scale_energy(&gains);
        let h = self.response(self.source, p, 1)?;
        Ok(sti_for_source(&h, &BandSpectrum::flat_db(60.0), &n, self.scene.physics.hearing)?.sti)
    }

    /// STI on a regular grid at table height, flattened as `[x, y, sti]` per point.
    pub fn field(&self, spacing: f64) -> Result<Vec<f64>, JsError> {
        self.field_values(spacing).map_err(to_js)
    }

    fn field_values(&self, spacing: f64) -> echoplace::Result<Vec<f64>> {
        let set = sample_listeners_with(&self.scene, spacing, Stratification::Centered)?;
        let mut out = Vec::with_capacity(3 * set.len());
        for c in &set.points {
            out.extend([c.position.x, c.position.y, self.sti_at(c.position)?]);
        }
        Ok(out)
    }

    /// Anneals over the grid with the default schedule. Returns the trace as
    /// `[x, y, q, best_q]` per iteration.
    pub fn optimize(&self, spacing: f64, seed: u64) -> Result<Vec<f64>, JsError> {
        self.anneal_trace(spacing, seed).map_err(to_js)
    }

    fn anneal_trace(&self, spacing: f64, seed: u64) -> echoplace::Result<Vec<f64>> {
        let set = sample_listeners_with(&self.scene, spacing, Stratification::Centered)?;
        let mut cache = vec![None; set.len()];
        let params = AnnealParams { seed, ..AnnealParams::default() };
        let outcome = anneal(set.len(), &params, |id| {
            if let Some(q) = cache[id] {
                return Ok(q);
            }
            let q = self.sti_at(set.position(id))?;
            cache[id] = Some(q);
            Ok(q)
        })?;
        let mut out = Vec::with_capacity(4 * outcome.trace.rows.len());
        for r in &outcome.trace.rows {
            let p = set.position(r.candidate_id);
            out.extend([p.x, p.y, r.q, r.best_q]);
        }
        Ok(out)
    }

    pub fn height(&self) -> f64 {
        self.height
    }
}
