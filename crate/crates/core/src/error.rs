//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by spaces, estimators and the conformal pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Two points (or a point and a descriptor) belong to different spaces.
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },

    /// A point violates the invariants of its declared space.
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    /// The requested operation is not available for this space.
    #[error("{space} does not support {op}")]
    Unsupported { space: String, op: &'static str },

    /// No training covariate falls inside the kernel window at `x`.
    #[error("no local data around x = {x}")]
    NoLocalData { x: f64 },

    /// An iterative solver exhausted its iteration cap.
    #[error("{what} failed to converge within {cap} iterations")]
    NotConverged { what: &'static str, cap: usize },

    /// Weight vector violates its contract (sum, signs, length).
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// Configuration value outside its documented range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Profile curves evaluated on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Scoring a calibration or test pair failed; carries the offending index.
    #[error("scoring failed for index {index}: {source}")]
    ScoreFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Dataset or artifact file could not be parsed; cites the line.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
