//! Error type shared by the library modules.

use thiserror::Error;

#[derive(Error, Debug, Clone)]
pub enum CoreError {
    /// Malformed argument (non-integral spin pair, x outside [-1,1], ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// Operation applied outside its domain (nonzero mean, nonzero trace, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix dimensions do not match.
    #[error("dimension mismatch: expected N={expected}, got N={got}")]
    Dimension { expected: usize, got: usize },

    /// Iterative solver failed to reach its tolerance.
    #[error("solver did not converge after {iters} iterations (residual {residual:.3e})")]
    SolverDiverged { iters: usize, residual: f64 },

    /// A sweep precondition failed (e.g. non-stationary base flow).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Not enough usable rows for a rate fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
