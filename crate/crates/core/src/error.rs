use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("incomplete code {shape}: kraft sum is {sum}, not 1")]
    IncompleteCode { shape: String, sum: String },

    #[error("histogram context set {available:?} does not cover contexts {needed:?} used by the scheme")]
    ContextMismatch {
        needed: Vec<String>,
        available: Vec<String>,
    },

    #[error("no valid labelling exists for this leaf")]
    NoLabelling,

    #[error("leaf {leaf} labelling is not valid on its cells: {msg}")]
    InvalidLabelling { leaf: usize, msg: String },

    #[error("payload truncated while decoding sample {index}")]
    TruncatedPayload { index: usize },

    #[error("scheme hash mismatch: blob was encoded with a different scheme")]
    SchemeHashMismatch,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
