use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix size must be at least 1")]
    EmptyMatrix,

    #[error("sample count must be at least 1")]
    NoSamples,

    #[error("evaluation point is within {distance:e} of eigenvalue {index}")]
    PoleProximity { index: usize, distance: f64 },

    #[error("eigensolver failed to converge on sample {sample}")]
    EigenSolver { sample: usize },

    #[error("input matrix is not unitary (max |UU* - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("need at least {required} samples, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("ratio formula: {0}")]
    Ratio(String),

    #[error("I/O error at `{path}`: {reason}")]
    Io { path: String, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
