//! Discrete listener candidates and source samples.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};
use crate::scene::Scene;

/// Largest jitter as a fraction of the cell size, either way along each axis.
pub const JITTER: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub position: Vec3,
    pub box_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub points: Vec<Candidate>,
    pub spacing: f64,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, id: usize) -> Vec3 {
        self.points[id].position
    }

    /// CSV with columns `x,y,z,box_id`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y", "z", "box_id"])?;
        for c in &self.points {
            let p = c.position;
            wr.write_record([p.x.to_string(), p.y.to_string(), p.z.to_string(), c.box_id.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Where each stratum's point goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratification {
    /// Cell centre (a regular grid).
    Centered,
    /// Centre plus a seeded offset of up to ±[`JITTER`] cells per axis.
    Jittered { seed: u64 },
}

/// Strata per axis: cells are never smaller than `spacing`, and a flat axis gets one.
fn strata(extent: f64, spacing: f64) -> usize {
    ((extent / spacing + 1e-9).floor() as usize).max(1)
}

/// One point per stratum of every listener box, keeping those in air.
pub fn sample_listeners_with(scene: &Scene, spacing: f64, mode: Stratification) -> Result<CandidateSet> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument(format!("spacing {spacing} must be positive")));
    }
    let mut points = Vec::new();
    for (box_id, b) in scene.listener_boxes.iter().enumerate() {
        let mut rng = match mode {
            Stratification::Jittered { seed } => {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(box_id as u64);
                Some(r)
            }
            Stratification::Centered => None,
        };
        let e = b.extent();
        let n = [strata(e.x, spacing), strata(e.y, spacing), strata(e.z, spacing)];
        let cell = Vec3::new(e.x / n[0] as f64, e.y / n[1] as f64, e.z / n[2] as f64);
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let mut frac = [i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5];
                    if let Some(r) = rng.as_mut() {
                        for f in &mut frac {
                            *f += r.random_range(-JITTER..=JITTER);
                        }
                    }
                    let p = b.min + Vec3::new(frac[0] * cell.x, frac[1] * cell.y, frac[2] * cell.z);
                    if scene.in_air(p) {
                        points.push(Candidate { position: p, box_id });
                    }
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    Ok(CandidateSet { points, spacing })
}

/// Stratified, jittered listener candidates (seed 0).
pub fn sample_listeners(scene: &Scene, spacing: f64) -> Result<CandidateSet> {
    sample_listeners_with(scene, spacing, Stratification::Jittered { seed: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSample {
    pub position: Vec3,
    pub weight: f64,
    /// Index of the source region it was drawn from.
    pub region: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceSamples {
    pub samples: Vec<SourceSample>,
}

impl SourceSamples {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.samples.iter().map(|s| s.position).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// CSV with columns `x,y,z,box_id,weight`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y", "z", "box_id", "weight"])?;
        for s in &self.samples {
            let p = s.position;
            wr.write_record([p.x.to_string(), p.y.to_string(), p.z.to_string(), s.region.to_string(), s.weight.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn uniform_in(b: &Aabb, rng: &mut ChaCha8Rng) -> Vec3 {
    let e = b.extent();
    let u = Vec3::new(rng.random(), rng.random(), rng.random());
    b.min + Vec3::new(u.x * e.x, u.y * e.y, u.z * e.z)
}

/// `per_region` uniform points in every source region, each with its region's weight.
pub fn sample_sources(scene: &Scene, per_region: usize, seed: u64) -> Result<SourceSamples> {
    if per_region == 0 {
        return Err(Error::InvalidArgument("at least one sample per region is required".into()));
    }
    let mut samples = Vec::with_capacity(per_region * scene.sources.len());
    for (region, s) in scene.sources.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(region as u64);
        for _ in 0..per_region {
            samples.push(SourceSample { position: uniform_in(&s.region, &mut rng), weight: s.weight, region });
        }
    }
    Ok(SourceSamples { samples })
}
