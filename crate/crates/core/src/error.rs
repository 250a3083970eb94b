use std::io;

use thiserror::Error;

/// Errors produced anywhere in the codec.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("write error on {path}: {source}")]
    Write { path: String, source: io::Error },

    #[error("header format error: {0}")]
    Format(String),

    #[error("corrupt input: {0}")]
    CorruptInput(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("corrupt stream in {segment}: {reason}")]
    CorruptStream { segment: String, reason: String },

    #[error("cube has no content: {0}")]
    NoContent(String),

    #[error("correlation undefined: both bands are constant")]
    UndefinedCorrelation,

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn corrupt(segment: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::CorruptStream {
            segment: segment.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
