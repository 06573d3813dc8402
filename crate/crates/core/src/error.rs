use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "relative entropy diverges: reference eigenvalue {eigenvalue:e} carries state weight {weight:e}"
    )]
    InfiniteDivergence { eigenvalue: f64, weight: f64 },

    #[error("target lies on or beyond the spectral boundary (|lambda| = {magnitude:.3e} > {limit})")]
    BoundaryTarget { magnitude: f64, limit: f64 },

    #[error("constraint cannot be tuned: {0}")]
    UntunableConstraint(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration accuracy: {0}")]
    Integration(String),

    #[error("hermitian eigendecomposition did not converge")]
    EigenFailure,

    #[error("entropy identity self-check failed: residual {residual:e}")]
    IdentityCheck { residual: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("malformed series file: {0}")]
    Series(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
