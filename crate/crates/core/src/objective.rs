//! The placement objective: weighted STI of every source sample heard at a
//! candidate listener, under the scene's noise.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::bands::BandSpectrum;
use crate::error::{Error, Result};
use crate::geo::{geometric_rir, pair_seed, GeoContext};
use crate::geometry::Vec3;
use crate::hybrid::crossover_combine;
use crate::anneal::{anneal, AnnealOutcome, AnnealParams};
use crate::placement::{CandidateSet, SourceSamples};
use crate::rir::ImpulseResponse;
use crate::scene::Scene;
use crate::sti::{octave_filter, sti_for_source, Rating, StiResult};
use crate::wave::WaveSolver;

/// How the responses are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Propagation {
    /// Wave band below the crossover, geometric band above.
    Hybrid,
    GeometricOnly,
}

/// Responses from every source sample and noise source to one listener.
#[derive(Debug, Clone)]
pub struct ListenerResponses {
    pub sources: Vec<ImpulseResponse>,
    pub noise: Vec<ImpulseResponse>,
}

/// Objective value at one listener position with its per-source breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub objective: f64,
    pub per_source: Vec<f64>,
    pub ratings: Vec<Rating>,
    /// Noise intensity at the listener, dB SPL per band.
    pub noise_db: [f64; crate::NUM_BANDS],
}

impl Evaluation {
    /// Weighted mean STI (objective divided by the total weight).
    pub fn mean_sti(&self, total_weight: f64) -> f64 {
        if total_weight > 0.0 {
            self.objective / total_weight
        } else {
            0.0
        }
    }
}

/// Evaluates the objective for one scene and source sample set. Holds the
/// prepared geometry and the wave grid, and caches results per candidate id.
pub struct Evaluator<'a> {
    scene: &'a Scene,
    sources: SourceSamples,
    seed: u64,
    geo: GeoContext,
    wave: Option<WaveSolver>,
    cache: Mutex<HashMap<usize, Evaluation>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(scene: &'a Scene, sources: SourceSamples, seed: u64, propagation: Propagation) -> Result<Self> {
        let wave = match propagation {
            Propagation::Hybrid if scene.physics.wave => Some(WaveSolver::new(scene)?),
            _ => None,
        };
        Ok(Self { scene, sources, seed, geo: GeoContext::new(scene), wave, cache: Mutex::new(HashMap::new()) })
    }

    pub fn sources(&self) -> &SourceSamples {
        &self.sources
    }

    pub fn propagation(&self) -> Propagation {
        if self.wave.is_some() {
            Propagation::Hybrid
        } else {
            Propagation::GeometricOnly
        }
    }

    /// Wave simulations run so far.
    pub fn solver_runs(&self) -> usize {
        self.wave.as_ref().map_or(0, WaveSolver::runs)
    }

    /// Distinct candidates evaluated through [`Self::evaluate_candidate`].
    pub fn cached(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// Responses for arbitrary emitter positions heard at `listener`: one
    /// wave run (emitted at the listener) plus one geometric trace per emitter.
    pub fn responses_for(&self, listener: Vec3, emitters: &[Vec3]) -> Result<Vec<ImpulseResponse>> {
        if !self.scene.in_air(listener) {
            return Err(Error::InvalidArgument(format!(
                "listener ({:.3}, {:.3}, {:.3}) is outside the air volume",
                listener.x, listener.y, listener.z
            )));
        }
        let geo_one = |s: &Vec3| geometric_rir(self.scene, &self.geo, *s, listener, pair_seed(self.seed, *s, listener));
        #[cfg(feature = "parallel")]
        let geo: Vec<Result<ImpulseResponse>> = {
            use rayon::prelude::*;
            emitters.par_iter().map(geo_one).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let geo: Vec<Result<ImpulseResponse>> = emitters.iter().map(geo_one).collect();
        let geo = geo.into_iter().collect::<Result<Vec<_>>>()?;

        let Some(wave) = &self.wave else {
            return Ok(geo);
        };
        let low = wave.rirs(listener, emitters)?;
        low.iter()
            .zip(&geo)
            .map(|(w, g)| crossover_combine(w, g, self.scene.physics.crossover_hz))
            .collect()
    }

    pub fn responses(&self, listener: Vec3) -> Result<ListenerResponses> {
        let mut emitters = self.sources.positions();
        emitters.extend(self.scene.noise.iter().map(|n| n.position));
        let mut all = self.responses_for(listener, &emitters)?;
        let noise = all.split_off(self.sources.len());
        Ok(ListenerResponses { sources: all, noise })
    }

    /// Noise intensity reaching the listener through the given responses.
    pub fn noise_at(&self, noise_rirs: &[ImpulseResponse]) -> Result<BandSpectrum> {
        let mut total = BandSpectrum::zero_energy();
        for (src, h) in self.scene.noise.iter().zip(noise_rirs) {
            let gains = octave_filter(h)?.gains();
            total = total.add_energy(&src.level().scale_energy(&gains));
        }
        Ok(total)
    }

    /// STI of every source sample given its response and the noise at the listener.
    pub fn source_stis(&self, rirs: &[ImpulseResponse], noise: &BandSpectrum) -> Result<Vec<StiResult>> {
        let hearing = self.scene.physics.hearing;
        let levels: Vec<BandSpectrum> = (0..self.scene.sources.len()).map(|r| self.scene.source_level(r)).collect();
        self.sources
            .samples
            .iter()
            .zip(rirs)
            .map(|(s, h)| sti_for_source(h, &levels[s.region], noise, hearing))
            .collect()
    }

    /// STI of a single source emitting `level` (dB SPL at 1 m) at `source`,
    /// heard at `listener` under the scene's noise.
    pub fn pair_sti(&self, source: Vec3, level: &BandSpectrum, listener: Vec3) -> Result<StiResult> {
        let mut emitters = vec![source];
        emitters.extend(self.scene.noise.iter().map(|n| n.position));
        let mut all = self.responses_for(listener, &emitters)?;
        let noise_rirs = all.split_off(1);
        let noise = self.noise_at(&noise_rirs)?;
        sti_for_source(&all[0], level, &noise, self.scene.physics.hearing)
    }

    /// Uncached objective at an arbitrary listener position.
    pub fn evaluate(&self, listener: Vec3) -> Result<Evaluation> {
        let r = self.responses(listener)?;
        let noise = self.noise_at(&r.noise)?;
        let stis = self.source_stis(&r.sources, &noise)?;
        let objective = self.sources.samples.iter().zip(&stis).map(|(s, x)| s.weight * x.sti).sum();
        Ok(Evaluation {
            objective,
            per_source: stis.iter().map(|x| x.sti).collect(),
            ratings: stis.iter().map(|x| x.rating).collect(),
            noise_db: noise.to_db().values,
        })
    }

    /// Objective for candidate `id` at `position`, computed once per id.
    pub fn evaluate_candidate(&self, id: usize, position: Vec3) -> Result<Evaluation> {
        if let Some(e) = self.cache.lock().expect("cache lock").get(&id) {
            return Ok(e.clone());
        }
        let e = self.evaluate(position)?;
        self.cache.lock().expect("cache lock").insert(id, e.clone());
        Ok(e)
    }
}

/// Anneals over `candidates` with the evaluator's objective.
pub fn optimize(evaluator: &Evaluator<'_>, candidates: &CandidateSet, params: &AnnealParams) -> Result<AnnealOutcome> {
    anneal(candidates.len(), params, |id| Ok(evaluator.evaluate_candidate(id, candidates.position(id))?.objective))
}
