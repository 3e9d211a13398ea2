use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid observation set: index {index} out of range for array length {n}")]
    InvalidOmega { index: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("degenerate weights: weighted Gram matrix is singular")]
    DegenerateWeights,

    #[error("solver failed: {reason}; last iterate {iterate:?}")]
    Solver { reason: String, iterate: Vec<f64> },

    #[error("solver diverged: non-finite iterate at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("invalid factor rank {rank}: must lie in 1..={max}")]
    InvalidRank { rank: usize, max: usize },

    #[error("ill-conditioned steering matrix: {0}")]
    IllConditioned(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
