use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("precondition violated for `{field}`: {reason}")]
    Precondition { field: &'static str, reason: String },

    /// A matrix meant to lie in SL(2,R) or SL(2,C) has a bad determinant.
    #[error("determinant check failed: |det - 1| = {deviation:e}")]
    Determinant { deviation: f64 },

    #[error("point is not in the upper half-plane (im = {im})")]
    NotInHalfPlane { im: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("reduction did not terminate within {budget} steps")]
    ReductionBudget { budget: usize },

    #[error("group verification failed: {0}")]
    GroupInvalid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
