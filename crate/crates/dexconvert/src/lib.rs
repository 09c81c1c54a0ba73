//! Ingestion into the Dexdata format and its bookkeeping.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`RawEpisodeBundle`] loads a raw recording: one image directory
//!    per camera view, `states.json`, optional `actions.json`,
//!    `prompt.txt` and `meta.json`.
//! 2. [`convert_episode`] drives an external encoder command over each
//!    view to produce one mp4 per view plus the episode's jsonl file,
//!    then validates the result and cross-checks mp4 frame counts.
//! 3. [`build_index_cache`] scans a converted dataset and writes
//!    `jsonl/index_cache.json` with per-episode metadata and probed
//!    video frame counts. Rebuilding with a pinned `--epoch` timestamp
//!    is byte-identical.
//! 4. [`storage_report`] compares raw-tree and Dexdata-tree sizes with
//!    exact byte accounting; [`verify_roundtrip`] re-checks a converted
//!    episode against its source bundle.
//!
//! Video encoding is always delegated to a configurable external
//! command; this crate ships a stub codec ([`stubenc`]) that writes
//! real, parseable mp4 containers with losslessly stored frames, which
//! is what the test suite and the examples use in place of a real
//! encoder like ffmpeg.

mod bundle;
mod convert;
mod error;
mod index;
mod storage;
pub mod stubenc;
mod template;
mod verify;

pub use bundle::{load_bundle, load_bundles, RawEpisodeBundle, ViewDir};
pub use convert::convert_episode;
pub use error::ConvertError;
pub use index::{build_index_cache, IndexCache, IndexEntry, INDEX_VERSION};
pub use storage::{storage_report, EpisodeStorage, StorageReport};
pub use template::{DecoderCommand, EncoderCommand};
pub use verify::{sniff_dims, verify_roundtrip, PixelCheck, RoundtripReport};
