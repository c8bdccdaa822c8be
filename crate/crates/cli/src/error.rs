use std::path::PathBuf;

use mfc0::io::IoError;
use mfc0::Mfc0Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: IoError },

    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: IoError },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] Mfc0Error),
}

impl CliError {
    /// 2 for bad input or configuration, 3 for numerical failure, 1 when the
    /// output directory cannot be written.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { .. } | CliError::Usage(_) => 2,
            CliError::Output { .. } => 1,
            CliError::Model(Mfc0Error::NonFinite { .. } | Mfc0Error::SvdFailed) => 3,
            CliError::Model(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
