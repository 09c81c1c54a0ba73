use crate::error::Mp4Error;
use crate::tables::SampleTables;

/// Byte range and timing of one frame (decode-order sample).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameEntry {
    pub byte_offset: u64,
    pub byte_len: u32,
    pub pts_ticks: u64,
}

/// Flattened per-frame index built from the sample tables once; lookups
/// afterwards are O(1). Immutable, so it can be shared across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameTable {
    entries: Vec<FrameEntry>,
    timescale: u32,
}

/// Result of a frame lookup, with presentation time resolved to seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLocation {
    pub byte_offset: u64,
    pub byte_len: u32,
    pub pts_seconds: f64,
}

impl FrameTable {
    pub fn frame_count(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn timescale(&self) -> u32 {
        self.timescale
    }

    pub fn entries(&self) -> &[FrameEntry] {
        &self.entries
    }

    /// O(1) lookup of a frame's byte range and presentation time.
    pub fn locate(&self, frame_idx: u64) -> Result<FrameLocation, Mp4Error> {
        let entry = usize::try_from(frame_idx)
            .ok()
            .and_then(|i| self.entries.get(i))
            .ok_or(Mp4Error::FrameOutOfRange {
                frame_idx,
                frame_count: self.frame_count(),
            })?;
        Ok(FrameLocation {
            byte_offset: entry.byte_offset,
            byte_len: entry.byte_len,
            pts_seconds: entry.pts_ticks as f64 / f64::from(self.timescale),
        })
    }
}

/// Expand the sample tables into one entry per frame.
///
/// Sample i's byte offset is its chunk's start plus the sizes of the
/// samples before it in the same chunk; its pts is the prefix sum of the
/// stts deltas before it. The tables must agree on the total sample count
/// and reference only chunks that exist, otherwise
/// [`Mp4Error::InconsistentTables`] is returned.
pub fn build_frame_table(tables: &SampleTables) -> Result<FrameTable, Mp4Error> {
    let inconsistent = |msg: String| Mp4Error::InconsistentTables(msg);

    if tables.timescale == 0 {
        return Err(inconsistent("timescale is zero".to_owned()));
    }
    let total = tables.sample_sizes.count();
    let stts_total: u64 = tables
        .time_deltas
        .iter()
        .map(|e| u64::from(e.count))
        .try_fold(0u64, |acc, c| acc.checked_add(c))
        .ok_or_else(|| inconsistent("stts sample count overflows".to_owned()))?;
    if stts_total != total {
        return Err(inconsistent(format!(
            "stsz declares {total} samples but stts covers {stts_total}"
        )));
    }
    if total == 0 {
        return Ok(FrameTable {
            entries: Vec::new(),
            timescale: tables.timescale,
        });
    }

    let runs = &tables.sample_to_chunk;
    if runs.is_empty() {
        return Err(inconsistent(
            "stsc is empty but stsz declares samples".to_owned(),
        ));
    }
    if runs[0].first_chunk != 1 {
        return Err(inconsistent(format!(
            "first stsc run starts at chunk {}, must be 1",
            runs[0].first_chunk
        )));
    }
    for pair in runs.windows(2) {
        if pair[1].first_chunk <= pair[0].first_chunk {
            return Err(inconsistent(format!(
                "stsc first_chunk values must be strictly increasing ({} then {})",
                pair[0].first_chunk, pair[1].first_chunk
            )));
        }
    }

    let mut entries = Vec::new();
    let mut produced: u64 = 0;
    let mut run_idx = 0usize;
    // lazy prefix-sum over the stts runs
    let mut stts_idx = 0usize;
    let mut used_in_run: u64 = 0;
    let mut pts: u64 = 0;

    for (chunk0, &chunk_start) in tables.chunk_offsets.iter().enumerate() {
        let chunk = chunk0 as u64 + 1; // stsc chunks are 1-based
        while run_idx + 1 < runs.len() && u64::from(runs[run_idx + 1].first_chunk) <= chunk {
            run_idx += 1;
        }
        let mut within: u64 = 0;
        for _ in 0..runs[run_idx].samples_per_chunk {
            if produced == total {
                return Err(inconsistent(format!(
                    "sample-to-chunk runs cover more than the {total} samples stsz declares"
                )));
            }
            let byte_len = tables.sample_sizes.get(produced).expect("produced < total");
            let byte_offset = chunk_start
                .checked_add(within)
                .ok_or_else(|| inconsistent("sample byte offset overflows".to_owned()))?;

            // advance the time iterator to this sample
            while u64::from(tables.time_deltas[stts_idx].count) == used_in_run {
                stts_idx += 1;
                used_in_run = 0;
            }
            let pts_ticks = pts;
            pts = pts
                .checked_add(u64::from(tables.time_deltas[stts_idx].delta))
                .ok_or_else(|| inconsistent("pts tick sum overflows".to_owned()))?;
            used_in_run += 1;

            entries.push(FrameEntry {
                byte_offset,
                byte_len,
                pts_ticks,
            });
            within += u64::from(byte_len);
            produced += 1;
        }
    }

    if produced != total {
        return Err(inconsistent(format!(
            "sample-to-chunk runs cover {produced} samples but stsz declares {total}"
        )));
    }

    Ok(FrameTable {
        entries,
        timescale: tables.timescale,
    })
}
