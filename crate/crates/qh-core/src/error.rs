use thiserror::Error;

/// Errors surfaced by the pipeline. `Internal` marks invariant violations
/// that indicate a bug rather than bad input.
#[derive(Error, Debug)]
pub enum QhError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("linear algebra error: {0}")]
    Linalg(String),
    #[error("presentation error: {0}")]
    Presentation(String),
    #[error("algebra may be infinite-dimensional: nilpotency bound {0} exceeded")]
    NilpotencyBound(usize),
    #[error("not quasi-hereditary: {0}")]
    NotQuasiHereditary(String),
    #[error("resolution exceeded max length {0}")]
    ResolutionTooLong(usize),
    #[error("field extension required: {0}")]
    FieldExtension(String),
    #[error("verification failure: {0}")]
    Verification(String),
    #[error("internal invariant violation: {0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QhError>;
