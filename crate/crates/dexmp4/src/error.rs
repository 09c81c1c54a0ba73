use thiserror::Error;

/// Everything that can go wrong while indexing an mp4 file.
///
/// Malformed input is always reported through one of these variants;
/// the parser does not panic on untrusted bytes.
#[derive(Debug, Error)]
pub enum Mp4Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A box header or payload extends past the file (or its parent box),
    /// or declares a size smaller than its own header.
    #[error("truncated or malformed box at offset {offset}: {detail}")]
    TruncatedBox { offset: u64, detail: String },

    /// A 64-bit `largesize` value overflows when resolved against the
    /// box's file offset.
    #[error("64-bit box size overflows at offset {offset}")]
    LargesizeOverflow { offset: u64 },

    #[error("no moov box found; not an indexable mp4 file")]
    NoMoov,

    #[error("no video track (handler 'vide') found")]
    NoVideoTrack,

    /// The file uses movie fragments (`moof`/`mvex`), which this indexer
    /// does not support; converters in this toolkit emit unfragmented files.
    #[error("fragmented mp4 (moof/mvex) is not supported")]
    UnsupportedFragmented,

    /// The sample tables disagree with each other (counts, chunk
    /// references, byte ranges) and no frame table can be built.
    #[error("inconsistent sample tables: {0}")]
    InconsistentTables(String),

    #[error("frame index {frame_idx} out of range (frame count {frame_count})")]
    FrameOutOfRange { frame_idx: u64, frame_count: u64 },
}
