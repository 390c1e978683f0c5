use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} outside the valid interval [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("integration failed at r = {r}: {reason}")]
    Integration { r: f64, reason: String },

    #[error("accuracy error: {what} (achieved {achieved:e}, required {required:e})")]
    Accuracy {
        what: String,
        achieved: f64,
        required: f64,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        }
    }
}
