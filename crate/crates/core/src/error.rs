//! Error taxonomy for model construction and evaluation.

use thiserror::Error;

/// Errors surfaced by constructors, solvers, and evaluators.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (shape, range, hermiticity,
    /// normalization, ...). The message names the offending quantity.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A steady-state or propagator computation hit a degenerate operator
    /// and cannot produce a unique answer.
    #[error("degenerate operator: {0}")]
    Degenerate(String),

    /// A numerical routine failed to reach its accuracy target.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Shorthand for a validation error with a formatted message.
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
