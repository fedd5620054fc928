use thiserror::Error;

/// Errors surfaced by the numeric and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A regularized matrix failed its positive-definite factorization.
    #[error("ill-conditioned matrix: {0}")]
    IllConditioned(&'static str),

    /// The Gram matrix of a training set is numerically singular
    /// (insufficient or degenerate data).
    #[error("rank-deficient training data: {0}")]
    RankDeficient(&'static str),

    /// A loss or intermediate value became NaN/Inf.
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    /// An iterative evaluation exceeded its budget.
    #[error("iteration budget exceeded: {0}")]
    NonConverged(&'static str),

    /// Root bracketing failed below the search cap.
    #[error("bracket failure: {0}")]
    BracketFailure(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("block size {block} does not divide usable count {total}")]
    NonDivisible { block: usize, total: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
