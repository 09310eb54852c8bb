use thiserror::Error;

use crate::bloch::ValidationReport;

/// Errors raised by radius computations, constructions and model building.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid POVM: {0}")]
    InvalidPovm(ValidationReport),

    #[error("vector is not of unit norm (norm {0})")]
    NotUnit(f64),

    #[error("degenerate POVM: every effect has zero purity")]
    DegeneratePovm,

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("too few distinct effect directions: need {needed}, found {found}")]
    TooFewEffects { needed: usize, found: usize },

    #[error("POVM is not flagged planar")]
    NotPlanar,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no nonnegative weights put the origin at the centroid of these directions")]
    InfeasibleWeights,

    #[error("gave up sampling a valid POVM after {attempts} attempts")]
    SamplingStuck { attempts: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: need at least {needed} points, got {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
