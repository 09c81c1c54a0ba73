//! Random frame access for mp4 video files without decoding.
//!
//! Dexdata episodes reference individual video frames by index
//! (`"frame_idx": 21`). To serve such a reference we only need the byte
//! range of the encoded sample, which the mp4 container already records
//! in its sample tables. This crate parses the ISO BMFF box tree, extracts
//! the sample tables of the first video track, and flattens them into a
//! [`FrameTable`] supporting O(1) index-to-byte-range lookup.
//!
//! The parser is defensive: it never reads past the file length, bounds
//! every table allocation by the bytes actually present, and turns all
//! malformed input into structured [`Mp4Error`] values instead of panics.
//!
//! Scope is deliberately narrow:
//! - `stco` and `co64` chunk offsets, 32-bit and 64-bit (`largesize`) box
//!   sizes are supported.
//! - Edit lists are ignored; a frame index means the decode-order sample
//!   index, which is the order converters write frames in.
//! - Only the first `vide` track is indexed; audio tracks are skipped.
//! - Fragmented files (`moof`/`mvex`) are rejected with
//!   [`Mp4Error::UnsupportedFragmented`].
//!
//! No decoding, no pixel output, no writing.

mod boxes;
mod error;
mod frame_table;
mod probe;
mod tables;

pub use boxes::{parse_boxes, BoxHeader, BoxNode, BoxTree, FourCc};
pub use error::Mp4Error;
pub use frame_table::{build_frame_table, FrameEntry, FrameLocation, FrameTable};
pub use probe::{index_reader, index_video, probe_reader, probe_video, VideoInfo};
pub use tables::{find_video_trak, read_sample_tables, SampleSizes, SampleTables, StscEntry, SttsEntry};
