use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has dimension zero")]
    EmptyMatrix,

    #[error("matrix is not Hermitian (max |H - H^†| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {requested} exceeds the configured cap {cap}")]
    CapExceeded { requested: u128, cap: u128 },

    #[error("invalid state {index}: {reason}")]
    InvalidState { index: usize, reason: String },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("letter {0} is outside the channel domain")]
    OutOfDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("candidate grid resolution {resolution:e} is not 10x finer than the packing scale {delta:e}")]
    GridTooCoarse { resolution: f64, delta: f64 },

    #[error("decoder does not match channel: {0}")]
    DecoderMismatch(String),

    #[error("separation premise not certified: {0}")]
    PremiseNotCertified(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
