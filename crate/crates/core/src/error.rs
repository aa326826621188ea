use thiserror::Error;

/// Errors produced by the geometry, curve and bound-evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("t = {t} is outside the sampled domain [{t_min}, {t_max}]")]
    OutOfDomain { t: f64, t_min: f64, t_max: f64 },

    #[error("non-finite value encountered at t = {t}")]
    NumericFailure { t: f64 },

    #[error("row {row}: {reason}")]
    Ingestion { row: usize, reason: String },

    #[error("too few points: found {found}, need at least {required}")]
    TooFewPoints { found: usize, required: usize },

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("curve and auxiliary function live on different manifolds: {0}")]
    ManifoldMismatch(String),

    #[error("hypotheses not satisfied: {0}")]
    HypothesisViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
