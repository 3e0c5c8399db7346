use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("{what} of size {size} exceeds the limit of {limit}")]
    Capacity {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("objective returned non-finite value {value} at {point:?}")]
    Evaluation { point: Vec<f64>, value: f64 },

    #[error("degenerate instance {0}: maximum cut is zero, approximation ratio undefined")]
    DegenerateInstance(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: malformed JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(
        "{}: corrupt record on line {line}; the first {valid_records} records ({valid_bytes} bytes) are salvageable",
        path.display()
    )]
    CorruptJournal {
        path: PathBuf,
        line: usize,
        valid_records: usize,
        valid_bytes: u64,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
