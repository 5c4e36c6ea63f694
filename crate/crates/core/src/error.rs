use thiserror::Error;

/// Errors raised by the estimators and samplers in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("function undefined at eigenvalue {0}")]
    Domain(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0})")]
    NotPsd(f64),

    #[error("matrix is rank deficient (eigenvalue {value} below floor {floor})")]
    RankDeficient { value: f64, floor: f64 },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid Lepski bracket: sigma_min = {sigma_min}, sigma_max = {sigma_max}")]
    InvalidBracket { sigma_min: f64, sigma_max: f64 },

    #[error("degenerate eigengap {gap:e} at k = {k}")]
    DegenerateGap { k: usize, gap: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("true parameter is zero")]
    InvalidTruth,

    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
