use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the harness; [`HarnessError::exit_code`] maps them to the CLI contract.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] ewi_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {message}")]
    Format { path: PathBuf, message: String },
    #[error("every trajectory in the sweep failed; first failure: {0}")]
    AllFailed(String),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration and I/O problems, 3 for numerical instability.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(ewi_core::Error::Instability { .. })
            | HarnessError::AllFailed(_) => 3,
            _ => 2,
        }
    }
}
