use alloc::string::String;

/// Everything that can go wrong in the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wealth became non-positive ({wealth:e}) at t = {t}")]
    NonPositiveWealth { t: f64, wealth: f64 },

    #[error("step would run past the horizon (t = {t}, horizon = {horizon})")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("value function curvature vanishes at wealth {wealth}")]
    SingularCurvature { wealth: f64 },

    #[error("configuration error: {0}")]
    ConfigError(String),

    #[error("recording grids or path counts differ: {0}")]
    GridMismatch(String),
}

pub type Result<T> = core::result::Result<T, Error>;
