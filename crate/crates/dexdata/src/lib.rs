//! Core types and I/O for the Dexdata episodic dataset format.
//!
//! A Dexdata dataset is a directory with two subdirectories:
//!
//! ```text
//! <root>/
//!     video/                  # one mp4 per episode view
//!     jsonl/
//!         index_cache.json    # auto-generated metadata for fast access
//!         episode1.jsonl      # one file per episode, one frame per line
//!         episode2.jsonl
//! ```
//!
//! Each line of an episode file is a JSON object describing one timestep:
//! multi-view image references (`images_1` .. `images_K`), the robot
//! `state` vector, the task `prompt` and an `is_robot` flag. Image pixels
//! are never inlined; a frame references a byte range inside an mp4 via
//! `{"type": "video", "url": "...", "frame_idx": N}`.
//!
//! This crate owns the frame-line schema (parse, canonical serialize),
//! per-episode validation and whole-dataset scanning. Frame lines
//! round-trip byte-exactly through [`parse_frame_line`] and
//! [`serialize_frame_line`]: the serialized form is canonical JSON with
//! lexicographically sorted keys, no insignificant whitespace and
//! shortest round-trip number rendering. Unknown keys are preserved so
//! the format can grow without breaking older tools.

mod error;
mod frame;
mod layout;
mod scan;
mod validate;

pub use error::{DexdataError, FrameError};
pub use frame::{parse_frame_line, serialize_frame_line, EpisodeFrame, ImageRef, VIEW_KEY_PREFIX};
pub use layout::DatasetLayout;
pub use scan::{scan_dataset, ScanReport};
pub use validate::{
    validate_episode, EpisodeMeta, EpisodeValidation, Severity, ValidationReport, Violation,
    ViolationKind,
};

/// Serialize any value to canonical JSON: keys sorted lexicographically,
/// no insignificant whitespace, numbers in shortest round-trip form.
///
/// Works by lowering to a `serde_json::Value` first; `serde_json`'s
/// default object map is ordered, which yields sorted keys.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> Result<String, DexdataError> {
    let v = serde_json::to_value(value).map_err(|e| DexdataError::Encode(e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| DexdataError::Encode(e.to_string()))
}
