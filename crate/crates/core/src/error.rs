use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("field does not belong to this grid")]
    GridMismatch,

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("unsupported geometry for {0}")]
    UnsupportedGeometry(&'static str),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("stability bound violated: {0}")]
    Stability(String),

    #[error("non-finite coefficients at step {step} (t = {time})")]
    Divergence { step: u64, time: f64 },

    #[error("undefined quantity: {0}")]
    Undefined(String),
}
