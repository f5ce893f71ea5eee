use thiserror::Error;

/// Errors raised by the Kriging layer and everything built on top of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("duplicate design points at rows {0} and {1}")]
    DuplicatePoints(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The kernel matrix stayed non positive definite after the largest jitter.
    #[error("kernel matrix is not positive definite even with jitter {jitter:e}")]
    DegenerateDesign { jitter: f64 },

    /// A prediction grid whose covariance cannot be factored (points too close).
    #[error("grid covariance is ill-conditioned even with jitter {jitter:e}")]
    IllConditionedGrid { jitter: f64 },

    /// Hypothetical observation at a site the model already knows.
    #[error("posterior variance {variance:e} at site is below the degenerate threshold")]
    DegenerateSite { variance: f64 },

    /// Every candidate point is already (numerically) in the design.
    #[error("design saturated: no candidate with positive posterior variance")]
    DesignSaturated,

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cost guard: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
