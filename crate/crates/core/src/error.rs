//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the enumerator toolkit.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A dimension list or multiset violates its invariants.
    #[error("invalid dimension data: {0}")]
    InvalidDimension(String),

    /// A multiset operation received arguments that are not nested as required.
    #[error("{child} is not a sub-multiset of {parent}")]
    NotSubMultiset { child: String, parent: String },

    /// Operands refer to different mixed-radix systems.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A state or operator fails a structural requirement.
    #[error("invalid state or operator: {0}")]
    InvalidState(String),

    /// A floating-point value has no nearby rational with a small denominator.
    #[error("cannot snap {value} to a rational with denominator <= {max_denom} within {tol}")]
    SnapFailed { value: f64, max_denom: u64, tol: f64 },

    /// An enumeration or solve would exceed the configured size guard.
    #[error("problem too large: {0}")]
    TooLarge(String),

    /// A construction's hypothesis does not hold for the given parameters.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// An internal cross-check between two computation paths disagreed.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    /// Malformed textual input (profile, state file, rational literal, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type CoreResult<T> = Result<T, CoreError>;
