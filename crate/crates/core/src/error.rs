use thiserror::Error;

/// Errors raised by the optimizer, the experiment harness and the CLI.
#[derive(Debug, Error)]
pub enum SwarmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration for `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error("non-finite value detected in particle state at step {step}")]
    NonFinite { step: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SwarmError {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        SwarmError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            SwarmError::Config { .. } | SwarmError::Parse(_) => 2,
            SwarmError::InvalidArgument(_) | SwarmError::DimensionMismatch { .. } => 2,
            SwarmError::Io { .. } => 3,
            SwarmError::NonFinite { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, SwarmError>;
