use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid deformation parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operands were built from different deformation parameters")]
    ParamsMismatch,

    #[error("operation requires all deformation parameters to be nonzero (a_{index} = 0)")]
    ZeroParameter { index: usize },

    #[error("matrix is not a member of the {space} space (residual {residual:e})")]
    NotMember { space: &'static str, residual: f64 },

    #[error("matrix is singular or ill-conditioned (reciprocal condition {rcond:e})")]
    Singular { rcond: f64 },

    #[error("degenerate symmetric form: eigenvalue {value:e} is below the classification threshold")]
    Degenerate { value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}
