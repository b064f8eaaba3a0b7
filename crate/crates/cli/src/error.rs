//! Command errors and their exit codes.

use std::path::PathBuf;

use ahp_eval::panel::PanelError;
use ahp_eval::storage::StorageError;
use ahp_eval::AhpError;
use thiserror::Error;

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_GATE: u8 = 4;
pub const EXIT_TRANSPORT: u8 = 5;
pub const EXIT_IO: u8 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    /// A problem on a specific line of an input file.
    #[error("{}:{line}: {message}", .path.display())]
    Input { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Gate(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", .path.display())]
    Project {
        path: PathBuf,
        #[source]
        source: StorageError,
    },
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error("{0}")]
    Other(String),
}

impl From<AhpError> for CliError {
    fn from(e: AhpError) -> Self {
        CliError::Storage(e.into())
    }
}

fn storage_code(e: &StorageError) -> u8 {
    match e {
        StorageError::Io { .. } => EXIT_IO,
        StorageError::GateRejected { .. } => EXIT_GATE,
        _ => EXIT_VALIDATION,
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { .. } | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Gate(_) => EXIT_GATE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Project { source, .. } | CliError::Storage(source) => storage_code(source),
            CliError::Panel(PanelError::InvalidRequest(_) | PanelError::Ahp(_)) => EXIT_VALIDATION,
            CliError::Panel(_) => EXIT_TRANSPORT,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

impl From<ahp_eval::sensitivity::SensitivityError> for CliError {
    fn from(e: ahp_eval::sensitivity::SensitivityError) -> Self {
        CliError::Validation(e.to_string())
    }
}
