//! JSON artifacts written by `optimize` and `field-map`.

use serde::Serialize;

use echoplace::anneal::AnnealParams;
use echoplace::objective::{Evaluation, Propagation};
use echoplace::sti::Rating;
use echoplace::Vec3;

#[derive(Debug, Serialize)]
pub struct Placement {
    pub candidate_id: usize,
    pub position: [f64; 3],
    pub box_id: usize,
    pub objective: f64,
    /// Objective divided by the total source weight.
    pub mean_sti: f64,
    pub per_source_sti: Vec<f64>,
    pub ratings: Vec<Rating>,
    pub noise_db: Vec<f64>,
}

impl Placement {
    pub fn new(candidate_id: usize, position: Vec3, box_id: usize, e: &Evaluation, total_weight: f64) -> Self {
        Self {
            candidate_id,
            position: [position.x, position.y, position.z],
            box_id,
            objective: e.objective,
            mean_sti: e.mean_sti(total_weight),
            per_source_sti: e.per_source.clone(),
            ratings: e.ratings.clone(),
            noise_db: e.noise_db.to_vec(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Parameters {
    pub anneal: AnnealParams,
    pub scheduled_iterations: usize,
    pub spacing: f64,
    pub rays: usize,
    pub crossover_hz: f64,
    pub sources_per_region: usize,
    pub propagation: Propagation,
}

/// Deterministic summary of an optimization run; wall time goes to `timing.json`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub scene_digest: String,
    pub seed: u64,
    pub candidates: usize,
    pub sources: usize,
    pub total_weight: f64,
    pub initial: Placement,
    pub best: Placement,
    pub improvement: f64,
    pub iterations: usize,
    pub distinct_evaluations: usize,
    pub wave_runs: usize,
    pub parameters: Parameters,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub wall_s: f64,
    pub threads: usize,
}
