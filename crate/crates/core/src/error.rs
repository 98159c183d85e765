use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("unsupported Schatten index p = {0}")]
    UnsupportedNorm(f64),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("map is not CPTP: {0}")]
    NotCptp(String),

    #[error("map is not Hermiticity-preserving (max deviation {deviation:e})")]
    NotHermiticityPreserving { deviation: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("no convergence after {iterations} iterations (best bracket [{lower}, {upper}])")]
    NoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("fit failed: {0}")]
    FitFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
