//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by input validation, numerical routines, and the optimizer.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Malformed or inconsistent input data (shape, symmetry, missing periods).
    #[error("data error: {0}")]
    Data(String),

    /// Invalid configuration or hyperparameter combination.
    #[error("config error: {0}")]
    Config(String),

    /// Input values outside a routine's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration collapsed to a state where a cost is undefined,
    /// e.g. all points coincide and every map distance is zero.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// The optimizer produced a non-finite cost.
    #[error("divergence at iteration {iteration}: cost became non-finite")]
    Divergence {
        /// Iteration at which the non-finite cost was detected.
        iteration: usize,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
