use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config not found: {0}")]
    ConfigNotFound(PathBuf),

    #[error("failed to parse {path}: {message}")]
    Parse { path: String, message: String },

    #[error("material `{name}` referenced by {element} is not defined")]
    DanglingMaterial { name: String, element: String },

    #[error("{element} lies outside the air volume")]
    OutsideAir { element: String },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simulation grid: {0}")]
    Grid(String),

    #[error("wave solver became unstable at step {step} (|p| = {magnitude:e})")]
    Unstable { step: usize, magnitude: f64 },

    #[error("no listener candidates inside the air volume")]
    EmptyCandidates,

    #[error("sample rates differ: {0} Hz vs {1} Hz")]
    SampleRateMismatch(f64, f64),

    #[error("empirical model out of validity range: {0}")]
    ModelValidity(String),

    #[error("audio: {0}")]
    Audio(#[from] hound::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
