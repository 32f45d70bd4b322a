use std::path::PathBuf;

use kai_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("cannot start worker threads: {0}")]
    Threads(String),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure is a bad input or path rather than a numerical
    /// one.
    pub fn is_config_error(&self) -> bool {
        match self {
            Self::Config(_) | Self::Parse { .. } | Self::Io { .. } => true,
            Self::Core(e) => matches!(
                e,
                CoreError::Geometry(_)
                    | CoreError::Scenario(_)
                    | CoreError::Config(_)
                    | CoreError::AngleOutOfRange(_)
                    | CoreError::MuOutOfRange(_)
                    | CoreError::UnknownModel(_)
                    | CoreError::UnknownEstimator(_)
            ),
            Self::Threads(_) => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
