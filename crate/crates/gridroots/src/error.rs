use thiserror::Error;

/// Errors produced by system construction, tracking, and classification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("start system requires total degree >= 1, polynomial {0} has degree < 1")]
    ZeroDegree(usize),

    #[error("coordinate {coord} is non-generic: {reason}")]
    NonGenericCoordinate { coord: usize, reason: String },

    #[error("eliminant coefficient has imaginary residue {0:.3e}; wrong pairing or non-generic coordinate")]
    ImaginaryResidue(f64),

    #[error("structural violation: {0}")]
    StructuralViolation(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("path is not diverged; no at-infinity diagnosis applies")]
    NotDiverged,

    #[error("parameter loop rejected: {0}")]
    LoopRejected(String),

    #[error("base point appears non-generic: {0}")]
    NonGenericBase(String),

    #[error("monodromy sampling exceeded the loop cap before stabilizing")]
    MonodromyStalled,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
