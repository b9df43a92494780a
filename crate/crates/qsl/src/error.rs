use std::io;

use thiserror::Error;

/// Errors surfaced by the search, posterior, and mission layers.
#[derive(Debug, Error)]
pub enum QslError {
    /// A sample location fell outside the unit interval.
    #[error("sample location {0} is outside [0, 1]")]
    OutOfRange(f64),

    /// A query point fell outside the raster extent.
    #[error("point ({x}, {y}) lies outside the raster extent")]
    OutsideExtent { x: f64, y: f64 },

    /// A parameter failed validation before any work was done.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An observed label has zero probability under the current posterior.
    /// Only reachable when the update probability is zero and the label
    /// contradicts every location that still carries mass.
    #[error("label observed at {0} contradicts the noiseless posterior")]
    Contradiction(f64),

    /// An algorithm was handed an oracle it cannot consume.
    #[error("{0}")]
    Misuse(String),

    /// Noiseless labels violated the feasible-interval invariant.
    #[error("labels contradict the feasible interval at p = 0")]
    InconsistentLabels,

    /// Too few usable points to form a finite-difference slope.
    #[error("slope estimation needs at least two resolvable sample points")]
    SlopeSamples,

    /// A raster file failed to parse.
    #[error("raster format error: {0}")]
    RasterFormat(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QslError>;
