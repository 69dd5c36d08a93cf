use std::path::PathBuf;

use skysweep_diffcore::Error as CoreError;
use skysweep_planesweep::GeometryError;
use skysweep_rednet::ModelError;
use skysweep_synthgen::SynthError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Data(#[from] SynthError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        HarnessError::Format { path: path.into(), detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
