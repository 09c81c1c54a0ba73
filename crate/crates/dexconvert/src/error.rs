use std::path::PathBuf;

use dexdata::{DexdataError, ValidationReport};
use dexmp4::Mp4Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Data(#[from] DexdataError),

    #[error("mp4 error at {path}: {source}")]
    Mp4 {
        path: PathBuf,
        #[source]
        source: Mp4Error,
    },

    #[error("bad bundle at {path}: {detail}")]
    BadBundle { path: PathBuf, detail: String },

    #[error("bad command template: {0}")]
    BadTemplate(String),

    #[error("encoder exited with {}: {stderr}", status.map_or("signal".to_string(), |c| format!("status {c}")))]
    EncoderFailed {
        status: Option<i32>,
        stderr: String,
    },

    #[error("{video} has {actual} frames but the source has {expected}")]
    FrameCountMismatch {
        video: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("episode failed validation:\n{0}")]
    InvalidEpisode(ValidationReport),

    #[error("{jsonl} references missing video {video}")]
    StaleVideo { jsonl: String, video: String },

    #[error("{jsonl} view {view} references frame {frame_idx} but {video} has {frame_count} frames")]
    FrameIdxOutOfRange {
        jsonl: String,
        video: String,
        view: usize,
        frame_idx: u64,
        frame_count: u64,
    },

    #[error("metadata mismatch{}: {detail}", line.map_or(String::new(), |n| format!(" at line {n}")))]
    MetadataMismatch { line: Option<u64>, detail: String },

    #[error("decode mismatch for {video}: {detail}")]
    DecodeMismatch { video: PathBuf, detail: String },

    #[error("unreadable image {path}: {detail}")]
    BadImage { path: PathBuf, detail: String },
}

impl ConvertError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ConvertError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn mp4(path: impl Into<PathBuf>, source: Mp4Error) -> Self {
        ConvertError::Mp4 {
            path: path.into(),
            source,
        }
    }
}
