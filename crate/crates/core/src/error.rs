use thiserror::Error;

/// Errors produced by the simulator and statistics engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum XebError {
    #[error("capacity exceeded: {what} = {value} (limit {limit})")]
    Capacity {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("index {index} out of range for {what} of size {size}")]
    Index {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl XebError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        XebError::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        XebError::Domain(msg.into())
    }
}

impl From<std::io::Error> for XebError {
    fn from(e: std::io::Error) -> Self {
        XebError::Io(e.to_string())
    }
}

impl From<csv::Error> for XebError {
    fn from(e: csv::Error) -> Self {
        XebError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for XebError {
    fn from(e: serde_json::Error) -> Self {
        XebError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, XebError>;
