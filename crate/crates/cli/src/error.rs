use std::path::PathBuf;

use krigrisk::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input, 3 for oracle failures, 4 for numerical breakdown.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                Error::Oracle(_) => 3,
                Error::InvalidInput(_)
                | Error::Parse(_)
                | Error::DimensionMismatch { .. }
                | Error::DuplicatePoints(..)
                | Error::TooLarge(_) => 2,
                Error::DegenerateDesign { .. }
                | Error::IllConditionedGrid { .. }
                | Error::DegenerateSite { .. }
                | Error::DesignSaturated => 4,
            },
        }
    }
}
