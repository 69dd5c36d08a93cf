use std::path::PathBuf;

use skysweep_planesweep::GeometryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("{}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl SynthError {
    pub fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        SynthError::Format { path: path.into(), detail: detail.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SynthError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, SynthError>;
