use thiserror::Error;

/// Errors produced by the analysis and reconstruction routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid moment sequence: {0}")]
    InvalidMoments(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("Hankel matrix is rank deficient at order {order}")]
    RankDeficient { order: usize },

    #[error("{what} is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPositiveSemidefinite { what: String, min_eig: f64 },

    #[error("truncation level {given} is below the required level {required}")]
    TruncationTooSmall { required: usize, given: usize },

    #[error("element is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("probe vectors do not span: rank {rank} < dimension {dim}")]
    SpanningDeficient { rank: usize, dim: usize },

    #[error("Gram system is too ill-conditioned (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("consistent family is missing required entries: {0}")]
    IncompleteFamily(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
