use skysweep_diffcore::Error as CoreError;
use skysweep_planesweep::GeometryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("incompatible parameters: {name} expected {expected}, found {found}")]
    Incompatible { name: String, expected: String, found: String },
    #[error("{path}: {detail}")]
    Format { path: String, detail: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, ModelError>;
