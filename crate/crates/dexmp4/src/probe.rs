use std::fs::File;
use std::io::{BufReader, Read, Seek, SeekFrom};
use std::path::Path;

use crate::boxes::parse_boxes;
use crate::error::Mp4Error;
use crate::frame_table::{build_frame_table, FrameTable};
use crate::tables::{find_video_trak, read_sample_tables};

/// Summary facts about the first video track of a file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VideoInfo {
    pub frame_count: u64,
    pub duration_seconds: f64,
    pub timescale: u32,
}

/// Parse, extract tables, build the frame table and cross-check every
/// frame's byte range against the file length.
pub fn index_reader<R: Read + Seek>(r: &mut R) -> Result<(VideoInfo, FrameTable), Mp4Error> {
    let file_len = r.seek(SeekFrom::End(0))?;
    let tree = parse_boxes(r)?;
    let trak = find_video_trak(r, &tree)?;
    let tables = read_sample_tables(r, trak)?;

    // A uniform stsz entry states its count without backing bytes, so cap
    // it by the file length before expanding into per-frame entries.
    let declared = tables.sample_sizes.count();
    if declared > file_len {
        return Err(Mp4Error::InconsistentTables(format!(
            "stsz declares {declared} samples in a {file_len}-byte file"
        )));
    }

    let table = build_frame_table(&tables)?;
    for (i, e) in table.entries().iter().enumerate() {
        let end = e.byte_offset.checked_add(u64::from(e.byte_len));
        match end {
            Some(end) if end <= file_len => {}
            _ => {
                return Err(Mp4Error::InconsistentTables(format!(
                    "sample {i} byte range {}+{} exceeds file length {file_len}",
                    e.byte_offset, e.byte_len
                )))
            }
        }
    }

    let total_ticks: u64 = tables
        .time_deltas
        .iter()
        .map(|e| u64::from(e.count) * u64::from(e.delta))
        .try_fold(0u64, |acc, t| acc.checked_add(t))
        .ok_or_else(|| Mp4Error::InconsistentTables("duration tick sum overflows".to_owned()))?;

    let info = VideoInfo {
        frame_count: table.frame_count(),
        duration_seconds: total_ticks as f64 / f64::from(table.timescale()),
        timescale: table.timescale(),
    };
    Ok((info, table))
}

/// [`index_reader`] without keeping the frame table.
pub fn probe_reader<R: Read + Seek>(r: &mut R) -> Result<VideoInfo, Mp4Error> {
    index_reader(r).map(|(info, _)| info)
}

/// Open a file and build its frame table.
pub fn index_video(path: impl AsRef<Path>) -> Result<(VideoInfo, FrameTable), Mp4Error> {
    let mut r = BufReader::new(File::open(path)?);
    index_reader(&mut r)
}

/// Open a file and report frame count, duration and timescale.
pub fn probe_video(path: impl AsRef<Path>) -> Result<VideoInfo, Mp4Error> {
    let mut r = BufReader::new(File::open(path)?);
    probe_reader(&mut r)
}
