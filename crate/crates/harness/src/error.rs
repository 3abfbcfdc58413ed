use std::path::PathBuf;

use qhd_core::QhdError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] QhdError),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{failed} of {total} acceptance criteria failed")]
    Acceptance { failed: usize, total: usize },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// 2 invalid input, 3 I/O, 4 accuracy, 5 solver abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Acceptance { .. } => 1,
            CliError::Model(e) => match e {
                QhdError::Domain(_) | QhdError::UnsupportedRegime { .. } | QhdError::Config(_) => 2,
                QhdError::Accuracy { .. } | QhdError::Constants(_) => 4,
                QhdError::Positivity { .. } | QhdError::NonFinite { .. } => 5,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
