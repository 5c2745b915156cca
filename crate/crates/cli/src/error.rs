use std::path::Path;

use thiserror::Error;

use plateau_core::circuit::ValidationReport;

pub type CliResult<T> = Result<T, CliError>;

/// Exit codes.
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INVALID_CLASS: u8 = 3;
pub const EXIT_CAP: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] plateau_core::Error),

    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    File {
        path: String,
        source: plateau_core::Error,
    },

    #[error("circuit is outside the supported class:\n{0}\n(pass --allow-invalid-class to proceed)")]
    InvalidClass(ValidationReport),

    #[error("{0}")]
    CheckFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn file(path: &Path, source: impl Into<plateau_core::Error>) -> Self {
        CliError::File {
            path: path.display().to_string(),
            source: source.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(plateau_core::Error::CapExceeded { .. })
            | CliError::File {
                source: plateau_core::Error::CapExceeded { .. },
                ..
            } => EXIT_CAP,
            CliError::InvalidClass(_) => EXIT_INVALID_CLASS,
            CliError::CheckFailed(_) => EXIT_CHECK_FAILED,
            _ => EXIT_INPUT,
        }
    }
}
