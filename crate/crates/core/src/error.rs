use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability vector is not normalized (sum = {sum}, len = {len})")]
    NotNormalized { sum: f64, len: usize },

    #[error("probability vector has an invalid entry {value} at index {index}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("symbol {index} is outside an alphabet of size {size}")]
    OutOfAlphabet { index: usize, size: usize },

    #[error("history is not alternating: {0}")]
    Misaligned(&'static str),

    #[error("model class exhausted: every operation mode assigns probability zero to the observation at step {step}")]
    ModelClassExhausted { step: usize },

    #[error("mode set and prior lengths differ ({modes} modes, {prior} prior weights)")]
    PriorLength { modes: usize, prior: usize },

    #[error("empty mode set")]
    EmptyModeSet,

    #[error("mode index {index} out of range for a set of {len} modes")]
    ModeIndex { index: usize, len: usize },

    #[error("lever {lever} out of range for a bandit with {levers} levers")]
    LeverIndex { lever: usize, levers: usize },

    #[error("bandit counts ({successes}, {failures}) exceed the Gittins table horizon {horizon}")]
    BeyondHorizon {
        successes: u64,
        failures: u64,
        horizon: usize,
    },

    #[error("Gittins calibration failed for state ({successes}, {failures}): residual {residual}")]
    Calibration {
        successes: u64,
        failures: u64,
        residual: f64,
    },

    #[error("no observed transitions: conditional precision is zero")]
    NoData,

    #[error("insufficient Monte-Carlo samples: {0}")]
    InsufficientSamples(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Map(#[from] crate::gridworld::MapError),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("cache file {path} is corrupt: {reason}")]
    Cache { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
