use thiserror::Error;

/// Errors raised by estimators, density estimates and the experiment harness.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("nonpositive density estimate {value} at a sample point")]
    NonpositiveDensity { value: f64 },

    #[error("plug-in information matrix is singular (condition number {condition:.3e})")]
    SingularOmega { condition: f64 },

    #[error("sample space has {size} points, enumeration bound is {bound}")]
    SpaceTooLarge { size: u128, bound: u128 },

    #[error("model has no exact normalizer")]
    NormalizerUnavailable,

    #[error("auxiliary density vanishes at a data point")]
    SupportViolation,

    #[error("fitted model assigns zero mass to a point in the truth's support")]
    InfiniteKl,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("n ≥ 1 required")]
    EmptyData,

    #[error("invalid configuration `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
