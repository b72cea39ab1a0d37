//! Error type shared by all modules.

use crate::space::Space;
use thiserror::Error;

/// Errors surfaced by the simulation core.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// An index (site, pair, basis state) was outside its valid range.
    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    /// A scalar or structural argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two objects live in different state spaces.
    #[error("space mismatch: expected {expected:?}, found {found:?}")]
    SpaceMismatch { expected: Space, found: Space },

    /// An operator flagged Hermitian failed the Hermiticity check.
    #[error("operator is not Hermitian (max deviation {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    /// A requested construction would exceed the configured dimension guard.
    #[error("dimension guard: requested {requested} exceeds limit {limit}")]
    DimensionGuard { requested: usize, limit: usize },

    /// A restriction lost more weight than the caller allowed.
    #[error("leakage {leakage:.3e} exceeds tolerance {tolerance:.3e}")]
    Leakage { leakage: f64, tolerance: f64 },

    /// A numerical procedure failed an internal consistency check.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CoreError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }
}

/// Convenience result alias for the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
