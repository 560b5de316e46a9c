use thiserror::Error;

/// Errors raised by the simulator and optimizer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("unsupported geometry: {0}")]
    Geometry(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        key,
        reason: reason.into(),
    }
}
