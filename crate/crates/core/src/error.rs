use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file (CSV/JSON parse problems), with a line number
    /// when one is known.
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    /// Data violates an invariant (non-finite coordinate, inconsistent
    /// dimensionality, empty trajectory, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A parameter is out of range for the given data (psi larger than the
    /// sample, non-positive bandwidth, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The requested run cannot be configured (e.g. a label-driven search
    /// without labels).
    #[error("configuration error: {0}")]
    Config(String),

    /// A metric cannot be computed (e.g. ROC-AUC on single-class labels).
    #[error("metric error: {0}")]
    Metric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
