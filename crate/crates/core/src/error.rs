use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("load error: {0}")]
    Load(String),

    #[error("assembly error at tuple {tuple:?}: {reason}")]
    Assembly { tuple: Vec<usize>, reason: String },

    #[error("face closure violated: tuple {tuple:?} is missing face {face:?}")]
    FaceClosure { tuple: Vec<usize>, face: Vec<usize> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("coverage failure: points {uncovered:?} are not covered")]
    Coverage { uncovered: Vec<usize> },

    #[error("assumption violated on intersection {balls:?}: {reason}")]
    AssumptionViolation { balls: Vec<usize>, reason: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
