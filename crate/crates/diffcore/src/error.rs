use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation in {op}: {detail}")]
    Contract { op: &'static str, detail: String },
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("degenerate input to {op}: {detail}")]
    Degenerate { op: &'static str, detail: String },
    #[error("checkpoint format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn contract(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Contract { op, detail: detail.into() }
    }

    pub fn degenerate(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Degenerate { op, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
