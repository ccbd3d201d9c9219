//! Simulated annealing over a discrete candidate set.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Just-noticeable difference of STI.
pub const STI_JND: f64 = 0.03;

/// Temperature at which a worsening of `delta` is accepted with probability `p`.
pub fn temperature_for(delta: f64, p: f64) -> f64 {
    delta / (1.0 / p).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    /// Initial temperature, STI units.
    pub t0: f64,
    /// Geometric cooling factor per iteration.
    pub alpha: f64,
    /// Stop after this many consecutive rejections.
    pub k_reject: usize,
    pub seed: u64,
    /// Stop once the temperature falls to this value.
    pub t_end: f64,
}

impl Default for AnnealParams {
    /// A JND-sized worsening is accepted with probability 1/2 at the start and 1/100 at the end.
    fn default() -> Self {
        Self { t0: temperature_for(STI_JND, 0.5), alpha: 0.95, k_reject: 10, seed: 0, t_end: temperature_for(STI_JND, 0.01) }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} must lie in (0, 1)", self.alpha));
        }
        if !(self.t_end > 0.0 && self.t_end < self.t0) {
            return bad(format!("need 0 < t_end ({}) < t0 ({})", self.t_end, self.t0));
        }
        if self.k_reject == 0 {
            return bad("k_reject must be at least 1".into());
        }
        Ok(())
    }

    /// Iterations the cooling schedule allows without early termination.
    pub fn scheduled_iterations(&self) -> usize {
        let mut t = self.t0;
        let mut n = 0;
        while t > self.t_end {
            t *= self.alpha;
            n += 1;
        }
        n
    }
}

/// Metropolis rule: always take an improvement, otherwise accept with
/// probability `exp((q_new - q) / t)`.
pub fn test_state(q: f64, q_new: f64, t: f64, rng: &mut impl Rng) -> bool {
    if q_new > q {
        return true;
    }
    let p = ((q_new - q) / t).exp();
    rng.random::<f64>() < p
}

/// A uniformly chosen candidate other than `current` (or `current` itself if it is the only one).
pub fn permute_state(current: usize, count: usize, rng: &mut impl Rng) -> Result<usize> {
    match count {
        0 => Err(Error::EmptyCandidates),
        1 => Ok(current),
        n => {
            let r = rng.random_range(0..n - 1);
            Ok(if r >= current { r + 1 } else { r })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub candidate_id: usize,
    pub q: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub accepted: bool,
    pub best_q: f64,
}

/// One row per iteration; row 0 is the random initial state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnealingTrace {
    pub rows: Vec<TraceRow>,
}

impl AnnealingTrace {
    /// CSV with columns `iter,candidate_id,q,T,accepted,best_q`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        if self.rows.is_empty() {
            wr.write_record(["iter", "candidate_id", "q", "T", "accepted", "best_q"])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Proposals made after the initial state.
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub best: usize,
    pub best_q: f64,
    pub initial: usize,
    pub initial_q: f64,
    pub trace: AnnealingTrace,
}

/// Maximizes `objective` over candidate ids `0..count`.
pub fn anneal(count: usize, params: &AnnealParams, mut objective: impl FnMut(usize) -> Result<f64>) -> Result<AnnealOutcome> {
    params.validate()?;
    if count == 0 {
        return Err(Error::EmptyCandidates);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut current = rng.random_range(0..count);
    let mut q = objective(current)?;
    let (initial, initial_q) = (current, q);
    let (mut best, mut best_q) = (current, q);
    let mut trace = AnnealingTrace::default();
    trace.rows.push(TraceRow { iter: 0, candidate_id: current, q, temperature: params.t0, accepted: true, best_q });

    let mut t = params.t0;
    let mut rejections = 0;
    while count > 1 && t > params.t_end {
        let candidate = permute_state(current, count, &mut rng)?;
        let q_new = objective(candidate)?;
        let accepted = test_state(q, q_new, t, &mut rng);
        if accepted {
            current = candidate;
            q = q_new;
            rejections = 0;
        } else {
            rejections += 1;
        }
        if q_new > best_q {
            best = candidate;
            best_q = q_new;
        }
        trace.rows.push(TraceRow { iter: trace.rows.len(), candidate_id: candidate, q: q_new, temperature: t, accepted, best_q });
        t *= params.alpha;
        if rejections >= params.k_reject {
            break;
        }
    }
    Ok(AnnealOutcome { best, best_q, initial, initial_q, trace })
}
