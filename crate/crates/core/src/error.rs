use std::path::Path;

use thiserror::Error;

use crate::algebra::AlgebraError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(AlgebraError),
    #[error("invalid scenario: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),
    #[error("cannot parse word {text:?}: {reason}")]
    WordSyntax { text: String, reason: String },
    #[error("unknown party {0:?}")]
    UnknownParty(String),
    #[error("bad scalar symbol: {0}")]
    BadSymbol(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("signaling distribution: {0}")]
    Signaling(String),
    #[error("invalid SDP problem: {0}")]
    Problem(String),
    #[error("SDPA format error: {0}")]
    Sdpa(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
