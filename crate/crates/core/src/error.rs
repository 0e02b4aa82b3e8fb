use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Error)]
pub enum FeneError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("point lies outside the open unit ball (|x| = {norm})")]
    OutsideDomain { norm: f64 },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("no natural number j0 exists for delta = {0}")]
    NoJ0(f64),

    #[error("shifted operator could not be factorized (alpha = {alpha})")]
    SingularOperator { alpha: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dense eigensolve refused: dimension {dim} exceeds limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("eigenvalue iteration failed: {0}")]
    EigenFailure(String),

    #[error("excessive step rejection rate {rate:.4} (dt = {dt})")]
    StepSize { rate: f64, dt: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FeneError {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        FeneError::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, FeneError>;
