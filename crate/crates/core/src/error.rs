use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unsupported derivative order {0}, only 1 and 2 are available")]
    DerivativeOrder(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("blow-up detected at step {step} (t = {time}): {reason}")]
    BlowUp {
        step: usize,
        time: f64,
        reason: String,
        /// Last state that passed the guard.
        last_valid: Box<crate::field::Field>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
