//! Crate-wide error type and resource limits.

use thiserror::Error;

/// Errors produced by lattice, substitution, domain, and spectral operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A point had the wrong number of coordinates, or coordinates violated a
    /// lattice constraint (e.g. odd coordinates in the Heisenberg lattice).
    #[error("structural error: {0}")]
    Structural(String),

    /// An enumeration would exceed the configured point cap.
    #[error("point enumeration of {count} points exceeds the cap of {cap} (set APERIODIQ_POINT_CAP to raise it)")]
    PointCap { count: u128, cap: u64 },

    /// A vertex/edge enumeration would exceed the configured cap.
    #[error("graph with {count} vertices exceeds the cap of {cap}")]
    GraphCap { count: String, cap: u64 },

    /// A bounded search exhausted its budget without an answer.
    #[error("no result within search bound: {0}")]
    NoResult(String),

    /// The requested operation is not defined for this lattice model.
    #[error("unsupported for this lattice model: {0}")]
    Unsupported(String),

    /// Integer arithmetic left the supported coordinate range.
    #[error("numeric overflow in {0}")]
    Overflow(&'static str),

    /// A dense eigensolve failed to converge.
    #[error("eigensolver failure: {0}")]
    Numeric(String),

    /// A `.sub` file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Structural(format!("serialization failure: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default cap on materialized point enumerations.
pub const DEFAULT_POINT_CAP: u64 = 10_000_000;

/// Reads the point cap, honoring the `APERIODIQ_POINT_CAP` environment
/// variable when set to a positive integer.
pub fn point_cap() -> u64 {
    std::env::var("APERIODIQ_POINT_CAP")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_POINT_CAP)
}
