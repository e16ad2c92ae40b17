use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] gpsplit_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    /// Process exit code: 2 for validation errors, 3 for a blow-up abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(gpsplit_core::Error::BlowUp { .. }) => 3,
            HarnessError::Core(
                gpsplit_core::Error::InvalidArgument(_)
                | gpsplit_core::Error::InvalidGrid(_)
                | gpsplit_core::Error::Unsupported(_)
                | gpsplit_core::Error::ShapeMismatch(_),
            ) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
