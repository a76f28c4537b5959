use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} contains non-finite entries")]
    NonFinite { what: &'static str },

    #[error("{op}: dimension mismatch ({detail})")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("effective channel is identically zero, no signal path")]
    NoSignalPath,

    #[error("combinatorial budget exceeded: {0}")]
    Budget(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(op: &'static str, detail: impl Into<String>) -> Error {
    Error::DimensionMismatch {
        op,
        detail: detail.into(),
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
