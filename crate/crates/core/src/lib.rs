//! Hybrid wave/geometric room acoustics with speech intelligibility scoring
//! and receiver placement by simulated annealing.
//!
//! The pipeline for one candidate receiver position:
//!
//! 1. a single FDTD run emitted from the receiver gives the low band of every
//!    source-to-receiver response at once (acoustic reciprocity),
//! 2. image sources plus stochastic ray tracing give the high band,
//! 3. a Linkwitz-Riley crossover merges the two,
//! 4. the merged response is scored with the Speech Transmission Index under
//!    the scene's noise sources,
//! 5. the weighted sum over sources is the objective the annealer maximizes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anneal;
pub mod bands;
pub mod decay;
pub mod dsp;
pub mod error;
pub mod geo;
pub mod geometry;
pub mod hybrid;
pub mod io;
pub mod objective;
pub mod placement;
pub mod rir;
pub mod scene;
pub mod sti;
pub mod wave;

pub use bands::{BandSpectrum, BandUnit, BAND_CENTERS_HZ, NUM_BANDS};
pub use error::{Error, Result};
pub use geometry::{Aabb, Vec3};
pub use rir::ImpulseResponse;
pub use scene::Scene;

/// Independent seed for sub-stream `stream` of a run seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    geo::splitmix(seed ^ geo::splitmix(stream))
}
