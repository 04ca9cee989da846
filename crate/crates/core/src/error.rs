//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("operator tag `{tag}` is not valid here: {reason}")]
    InvalidTag { tag: String, reason: String },

    #[error("site {site} out of range 1..={n_qubits}")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few levels: need at least {needed}, have {got}")]
    TooFewLevels { needed: usize, got: usize },

    #[error("eigensolver failed: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
