use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while parsing a single frame line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("malformed json: {0}")]
    MalformedJson(String),

    #[error("missing required field '{0}'")]
    MissingField(String),

    #[error("field '{field}' must be {expected}")]
    BadFieldType { field: String, expected: &'static str },

    #[error("bad image ref '{view}': {detail}")]
    BadImageRef { view: String, detail: String },

    #[error("bad view keys: {0}")]
    BadViewKeys(String),
}

/// Crate-level error type. Semantic violations inside an episode are not
/// errors; they accumulate in a `ValidationReport` instead.
#[derive(Debug, Error)]
pub enum DexdataError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json encode error: {0}")]
    Encode(String),

    #[error(transparent)]
    Frame(#[from] FrameError),
}

impl DexdataError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DexdataError::Io {
            path: path.into(),
            source,
        }
    }
}
