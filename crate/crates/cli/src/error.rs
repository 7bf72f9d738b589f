use std::path::PathBuf;

use thiserror::Error;

/// Failures that abort a run. Check failures are not errors; they set exit code 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Usage { field: String, message: String },

    #[error("{field}: cannot read {}: {source}", path.display())]
    Read {
        field: String,
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{field}: {source}")]
    Core {
        field: String,
        source: modflow_core::Error,
    },
}

impl CliError {
    pub fn usage(field: &str, message: impl Into<String>) -> Self {
        CliError::Usage { field: field.to_string(), message: message.into() }
    }

    pub fn core(field: &str, source: modflow_core::Error) -> Self {
        CliError::Core { field: field.to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source: modflow_core::Error::Resource { .. }, .. } => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a field name to core errors.
pub trait Context<T> {
    fn field(self, field: &str) -> CliResult<T>;
}

impl<T> Context<T> for modflow_core::Result<T> {
    fn field(self, field: &str) -> CliResult<T> {
        self.map_err(|e| CliError::core(field, e))
    }
}
