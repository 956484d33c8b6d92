use thiserror::Error;

use crate::algorithms::RunRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vectors and matrices must have at least one entry")]
    Empty,

    #[error("non-finite entry {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("power iteration did not converge in {iterations} iterations (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("function `{0}` has no proximal operator")]
    NoProx(String),

    #[error("grid argmin {argmin} sits on the window boundary [{lo}, {hi}]; widen the window")]
    WindowTooSmall { argmin: f64, lo: f64, hi: f64 },

    #[error("point is at a kink of `{0}`; use the subdifferential membership test instead")]
    AtKink(String),

    #[error("iterate became non-finite at iteration {iteration}")]
    Divergence {
        iteration: usize,
        partial: Box<RunRecord>,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
