//! Errors reported by the binary, each with an exit code and a stable kind tag.

use std::path::{Path, PathBuf};

use skysweep_harness::HarnessError;
use skysweep_rednet::ModelError;
use skysweep_synthgen::SynthError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: not found", path.display())]
    NotFound { path: PathBuf },
    #[error("{0}")]
    Incompatible(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error(transparent)]
    Harness(HarnessError),
}

impl CliError {
    pub fn from_io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::NotFound { path: path.to_path_buf() }
        } else {
            CliError::Harness(HarnessError::io(path, e))
        }
    }

    /// 2: configuration or usage, 3: missing input, 4: anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NotFound { .. } => 3,
            _ => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::NotFound { .. } => "not-found",
            CliError::Incompatible(_) => "incompatible",
            CliError::CheckFailed(_) => "check-failed",
            CliError::Harness(h) => match h {
                HarnessError::Contract(_) => "contract",
                HarnessError::Degenerate(_) => "degenerate",
                HarnessError::Numeric(_) => "numeric",
                HarnessError::Format { .. } => "format",
                HarnessError::Io { .. } => "io",
                HarnessError::Data(_) => "data",
                HarnessError::Model(_) => "model",
                HarnessError::Core(_) => "core",
                HarnessError::Geometry(_) => "geometry",
            },
        }
    }

    /// `error kind=<kind> code=<code>: <message>` on one line.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error kind={} code={}: {msg}", self.kind(), self.exit_code())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io { path, source } if source.kind() == std::io::ErrorKind::NotFound => {
                CliError::NotFound { path }
            }
            HarnessError::Data(SynthError::Io { path, source }) if source.kind() == std::io::ErrorKind::NotFound => {
                CliError::NotFound { path }
            }
            HarnessError::Model(m @ ModelError::Incompatible { .. }) => CliError::Incompatible(m.to_string()),
            HarnessError::Contract(msg) => CliError::Config(msg),
            other => CliError::Harness(other),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        HarnessError::from(e).into()
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        HarnessError::from(e).into()
    }
}
