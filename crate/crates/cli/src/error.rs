use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema: {0}")]
    Schema(String),

    #[error("precondition violated for `{field}`: {reason}")]
    Precondition { field: String, reason: String },

    #[error("group verification failed: {0}")]
    Group(foliate::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("runtime: {0}")]
    Runtime(foliate::Error),
}

impl CliError {
    pub fn precondition(field: &str, reason: impl Into<String>) -> Self {
        CliError::Precondition { field: field.to_string(), reason: reason.into() }
    }

    /// Library errors raised by argument checks are configuration errors;
    /// everything else happened during the computation.
    pub fn from_core(e: foliate::Error) -> Self {
        match e {
            foliate::Error::Precondition { field, reason } => CliError::Precondition { field: field.to_string(), reason },
            foliate::Error::GroupInvalid(_) => CliError::Group(e),
            other => CliError::Runtime(other),
        }
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Precondition { .. } => "precondition",
            CliError::Group(_) => "group",
            CliError::Io { .. } => "io",
            CliError::Runtime(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Precondition { .. } | CliError::Group(_) => 2,
            CliError::Io { .. } | CliError::Runtime(_) => 3,
        }
    }
}

impl From<foliate::Error> for CliError {
    fn from(e: foliate::Error) -> Self {
        CliError::from_core(e)
    }
}
