use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported snapshot version {found} (this build reads up to {supported})")]
    Version { found: u32, supported: u32 },
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("replay mismatch: {0}")]
    Replay(String),
    #[error("model error: {0}")]
    Model(#[from] hwarch_core::Error),
}

impl HarnessError {
    pub fn config(field: &str, reason: impl std::fmt::Display) -> Self {
        HarnessError::Config(format!("{field}: {reason}"))
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for file and snapshot problems, 1 for the rest.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Model(_) | HarnessError::Replay(_) => 1,
            HarnessError::Io { .. } | HarnessError::Version { .. } | HarnessError::CorruptSnapshot(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
