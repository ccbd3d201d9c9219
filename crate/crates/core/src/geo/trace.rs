use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GeoContext;
use crate::bands::{BAND_CENTERS_HZ, NUM_BANDS};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scene::Scene;

/// Rays are dropped once every band falls below this fraction of their initial energy.
pub const KILL_ENERGY: f64 = 1e-6;
/// Rays are dropped after this much travel time, s.
pub const MAX_PATH_TIME: f64 = 3.0;
const ESCAPE_WARNING: f64 = 0.05;
/// Rays per work unit; results are summed in unit order so they do not depend on thread count.
const CHUNK: usize = 1024;

/// Per-band energy arriving at the listener per time bin, relative to a unit
/// source. The direct sound at distance d contributes `1/d²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyHistogram {
    pub bin_width: f64,
    /// `energy[k][b]`: band `k`, bin `b` covering `[b·Δ, (b+1)·Δ)`.
    pub energy: [Vec<f64>; NUM_BANDS],
    pub rays: usize,
    pub escaped: usize,
}

impl EnergyHistogram {
    pub fn zeros(bin_width: f64, bins: usize) -> Self {
        Self { bin_width, energy: std::array::from_fn(|_| vec![0.0; bins]), rays: 0, escaped: 0 }
    }

    pub fn bins(&self) -> usize {
        self.energy[0].len()
    }

    pub fn duration(&self) -> f64 {
        self.bins() as f64 * self.bin_width
    }

    pub fn band_total(&self, k: usize) -> f64 {
        self.energy[k].iter().sum()
    }

    pub fn escaped_fraction(&self) -> f64 {
        if self.rays == 0 {
            0.0
        } else {
            self.escaped as f64 / self.rays as f64
        }
    }

    fn accumulate(&mut self, other: &Self) {
        for (a, b) in self.energy.iter_mut().zip(&other.energy) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.rays += other.rays;
        self.escaped += other.escaped;
    }

    /// CSV with columns `band_hz,bin_start_s,energy`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["band_hz", "bin_start_s", "energy"])?;
        for (k, band) in self.energy.iter().enumerate() {
            for (b, e) in band.iter().enumerate() {
                wr.write_record([BAND_CENTERS_HZ[k].to_string(), (b as f64 * self.bin_width).to_string(), e.to_string()])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Detector sphere radius for a given bin width.
pub fn detector_radius(bin_width: f64, c: f64) -> f64 {
    (c * bin_width / 2.0).max(0.1)
}

/// Traces `ray_count` rays from `source` using the scene's bin width and response length.
pub fn trace_histogram(scene: &Scene, source: Vec3, listener: Vec3, ray_count: usize, seed: u64) -> Result<EnergyHistogram> {
    let ctx = GeoContext::new(scene);
    trace_with(&ctx, source, listener, ray_count, seed, scene.physics.bin_width, scene.physics.rir_duration)
}

pub(super) fn trace_with(
    ctx: &GeoContext,
    source: Vec3,
    listener: Vec3,
    ray_count: usize,
    seed: u64,
    bin_width: f64,
    duration: f64,
) -> Result<EnergyHistogram> {
    if ray_count == 0 {
        return Err(Error::InvalidArgument("ray count must be positive".into()));
    }
    if !(bin_width > 0.0) || !(duration > 0.0) {
        return Err(Error::InvalidArgument("bin width and duration must be positive".into()));
    }
    let bins = (duration / bin_width).ceil() as usize;
    let chunks: Vec<std::ops::Range<usize>> = (0..ray_count).step_by(CHUNK).map(|s| s..(s + CHUNK).min(ray_count)).collect();
    let run = |r: &std::ops::Range<usize>| {
        let mut h = EnergyHistogram::zeros(bin_width, bins);
        for i in r.clone() {
            trace_ray(ctx, source, listener, ray_count, seed, i, &mut h);
        }
        h
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<EnergyHistogram> = {
        use rayon::prelude::*;
        chunks.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<EnergyHistogram> = chunks.iter().map(run).collect();

    let mut hist = EnergyHistogram::zeros(bin_width, bins);
    for p in &parts {
        hist.accumulate(p);
    }
    let frac = hist.escaped_fraction();
    if frac > ESCAPE_WARNING {
        log::warn!("{:.1}% of rays escaped the mesh; check that it encloses the air volume", 100.0 * frac);
    }
    Ok(hist)
}

fn uniform_sphere(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Cosine-weighted direction in the hemisphere around `n`.
fn cosine_hemisphere(rng: &mut ChaCha8Rng, n: Vec3) -> Vec3 {
    let u: f64 = rng.random();
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = u.sqrt();
    let (x, y, z) = (r * phi.cos(), r * phi.sin(), (1.0 - u).max(0.0).sqrt());
    let helper = if n.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let t = n.cross(helper).normalized();
    let b = n.cross(t);
    (t * x + b * y + n * z).normalized()
}

fn trace_ray(ctx: &GeoContext, source: Vec3, listener: Vec3, ray_count: usize, seed: u64, index: usize, hist: &mut EnergyHistogram) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let c = ctx.speed_of_sound;
    let radius = detector_radius(hist.bin_width, c);
    let r2 = radius * radius;
    let gain = 4.0 / r2;
    let bins = hist.bins();
    let max_len = (MAX_PATH_TIME * c).min(bins as f64 * hist.bin_width * c);
    let kill = KILL_ENERGY / ray_count as f64;

    let mut energy = [1.0 / ray_count as f64; NUM_BANDS];
    let mut origin = source;
    let mut dir = uniform_sphere(&mut rng);
    let mut travelled = 0.0;
    hist.rays += 1;
    loop {
        let hit = ctx.bvh.intersect(origin, dir, 1e-9, f64::INFINITY);
        let seg_len = hit.map_or(f64::INFINITY, |h| h.t);

        let oc = listener - origin;
        let tca = oc.dot(dir);
        if tca >= 0.0 && tca <= seg_len {
            let d2 = oc.dot(oc) - tca * tca;
            if d2 <= r2 {
                let bin = ((travelled + tca) / c / hist.bin_width) as usize;
                if bin < bins {
                    for (band, e) in hist.energy.iter_mut().zip(&energy) {
                        band[bin] += e * gain;
                    }
                }
            }
        }

        let Some(hit) = hit else {
            hist.escaped += 1;
            return;
        };
        travelled += hit.t;
        if travelled > max_len {
            return;
        }
        let tri = hit.triangle;
        for (e, a) in energy.iter_mut().zip(&ctx.absorption[tri]) {
            *e *= 1.0 - a;
        }
        if energy.iter().all(|&e| e < kill) {
            return;
        }
        let mut n = ctx.bvh.triangles()[tri].normal();
        if n.dot(dir) > 0.0 {
            n = -n;
        }
        origin += dir * hit.t;
        dir = if rng.random::<f64>() < ctx.scattering[tri] {
            cosine_hemisphere(&mut rng, n)
        } else {
            (dir - n * (2.0 * dir.dot(n))).normalized()
        };
        origin += n * 1e-9;
    }
}
