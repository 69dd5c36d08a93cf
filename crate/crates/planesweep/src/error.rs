use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point is behind the camera (depth {depth})")]
    BehindCamera { depth: f64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("singular homography: {0}")]
    Singular(String),
    #[error("camera file line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, GeometryError>;
