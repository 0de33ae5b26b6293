use std::path::{Path, PathBuf};

use isbjssp_core::ppo::PpoError;
use isbjssp_core::{InstanceError, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("the GNN scheduler needs --checkpoint")]
    MissingCheckpoint,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Train(#[from] PpoError),
}

impl CliError {
    /// 0 success, 1 usage, 2 validation failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::MissingCheckpoint => 1,
            CliError::Validation(_) => 2,
            CliError::Io { .. } | CliError::Parse { .. } => 3,
            CliError::Sim(_) | CliError::Train(_) => 2,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, message: impl ToString) -> CliError {
        CliError::Parse { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn instance(path: &Path, err: InstanceError) -> CliError {
        match err {
            InstanceError::Io { message, .. } => {
                CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(message) }
            }
            other => CliError::parse(path, other),
        }
    }
}
