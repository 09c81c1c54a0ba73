use std::io::{Cursor, Read, Seek};

use byteorder::{BigEndian, ReadBytesExt};

use crate::boxes::{full_payload, payload_prefix, BoxHeader, BoxNode, BoxTree};
use crate::error::Mp4Error;

/// One `stts` run: `count` consecutive samples each lasting `delta` ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SttsEntry {
    pub count: u32,
    pub delta: u32,
}

/// One `stsc` run: starting at 1-based `first_chunk`, every chunk holds
/// `samples_per_chunk` samples until the next run begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StscEntry {
    pub first_chunk: u32,
    pub samples_per_chunk: u32,
}

/// Per-sample byte sizes from `stsz`, kept in the file's own encoding so a
/// uniform table never forces a per-sample allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleSizes {
    Uniform { size: u32, count: u32 },
    PerSample(Vec<u32>),
}

impl SampleSizes {
    pub fn count(&self) -> u64 {
        match self {
            SampleSizes::Uniform { count, .. } => u64::from(*count),
            SampleSizes::PerSample(sizes) => sizes.len() as u64,
        }
    }

    pub fn get(&self, sample: u64) -> Option<u32> {
        match self {
            SampleSizes::Uniform { size, count } => {
                (sample < u64::from(*count)).then_some(*size)
            }
            SampleSizes::PerSample(sizes) => {
                usize::try_from(sample).ok().and_then(|i| sizes.get(i)).copied()
            }
        }
    }
}

/// The raw sample tables of one video track, exactly as stored in the
/// container. [`crate::build_frame_table`] flattens them per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleTables {
    pub sample_sizes: SampleSizes,
    /// Absolute chunk start offsets from `stco` or `co64`.
    pub chunk_offsets: Vec<u64>,
    pub sample_to_chunk: Vec<StscEntry>,
    pub time_deltas: Vec<SttsEntry>,
    /// Ticks per second from `mdhd`.
    pub timescale: u32,
}

/// Find the first track whose handler type is `vide`.
///
/// Tracks without a readable `hdlr` box are skipped rather than failing the
/// whole file; only the absence of any video track is an error.
pub fn find_video_trak<'t, R: Read + Seek>(
    r: &mut R,
    tree: &'t BoxTree,
) -> Result<&'t BoxNode, Mp4Error> {
    let moov = tree.moov()?;
    for trak in moov.children_of(b"trak") {
        let Some(hdlr) = trak.find_path(&[b"mdia", b"hdlr"]) else {
            continue;
        };
        // hdlr payload: version/flags (4), pre_defined (4), handler_type (4)
        let Ok(prefix) = payload_prefix(r, &hdlr.header, 12) else {
            continue;
        };
        if &prefix[8..12] == b"vide" {
            return Ok(trak);
        }
    }
    Err(Mp4Error::NoVideoTrack)
}

/// Extract the sample tables of one `trak` subtree.
pub fn read_sample_tables<R: Read + Seek>(
    r: &mut R,
    trak: &BoxNode,
) -> Result<SampleTables, Mp4Error> {
    let mdhd = trak
        .find_path(&[b"mdia", b"mdhd"])
        .ok_or_else(|| Mp4Error::InconsistentTables("missing mdhd box".to_owned()))?;
    let timescale = parse_mdhd(r, &mdhd.header)?;

    let stbl = trak
        .find_path(&[b"mdia", b"minf", b"stbl"])
        .ok_or_else(|| Mp4Error::InconsistentTables("missing stbl box".to_owned()))?;

    let required = |code: &[u8; 4], name: &str| {
        stbl.child(code)
            .map(|n| n.header)
            .ok_or_else(|| Mp4Error::InconsistentTables(format!("missing {name} box")))
    };

    let stsz = required(b"stsz", "stsz")?;
    let sample_sizes = parse_stsz(&full_payload(r, &stsz)?, &stsz)?;

    let chunk_offsets = match (stbl.child(b"stco"), stbl.child(b"co64")) {
        (Some(stco), _) => parse_chunk_offsets(&full_payload(r, &stco.header)?, &stco.header, 4)?,
        (None, Some(co64)) => {
            parse_chunk_offsets(&full_payload(r, &co64.header)?, &co64.header, 8)?
        }
        (None, None) => {
            return Err(Mp4Error::InconsistentTables(
                "missing stco/co64 box".to_owned(),
            ))
        }
    };

    let stsc = required(b"stsc", "stsc")?;
    let sample_to_chunk = parse_stsc(&full_payload(r, &stsc)?, &stsc)?;

    let stts = required(b"stts", "stts")?;
    let time_deltas = parse_stts(&full_payload(r, &stts)?, &stts)?;

    Ok(SampleTables {
        sample_sizes,
        chunk_offsets,
        sample_to_chunk,
        time_deltas,
        timescale,
    })
}

fn truncated(header: &BoxHeader, detail: String) -> Mp4Error {
    Mp4Error::TruncatedBox {
        offset: header.offset,
        detail,
    }
}

/// Entry count declared by a table box, validated against the payload bytes
/// actually present so a lying header can never force a huge allocation.
fn checked_entry_count(
    payload: &[u8],
    header: &BoxHeader,
    fixed_prefix: usize,
    entry_len: usize,
) -> Result<usize, Mp4Error> {
    let mut cur = Cursor::new(&payload[4..]); // skip version/flags
    let declared = cur.read_u32::<BigEndian>().map_err(|_| {
        truncated(header, format!("{} payload too short", header.box_type))
    })? as usize;
    let available = (payload.len() - fixed_prefix) / entry_len;
    if declared > available {
        return Err(truncated(
            header,
            format!(
                "{} declares {declared} entries but payload holds {available}",
                header.box_type
            ),
        ));
    }
    Ok(declared)
}

fn parse_stsz(payload: &[u8], header: &BoxHeader) -> Result<SampleSizes, Mp4Error> {
    // version/flags (4), sample_size (4), sample_count (4)
    if payload.len() < 12 {
        return Err(truncated(header, "stsz payload shorter than 12 bytes".to_owned()));
    }
    let mut cur = Cursor::new(&payload[4..]);
    let sample_size = cur.read_u32::<BigEndian>().unwrap();
    let sample_count = cur.read_u32::<BigEndian>().unwrap();
    if sample_size != 0 {
        return Ok(SampleSizes::Uniform {
            size: sample_size,
            count: sample_count,
        });
    }
    let declared = sample_count as usize;
    let available = (payload.len() - 12) / 4;
    if declared > available {
        return Err(truncated(
            header,
            format!("stsz declares {declared} per-sample entries but payload holds {available}"),
        ));
    }
    let mut sizes = Vec::with_capacity(declared);
    for _ in 0..declared {
        sizes.push(cur.read_u32::<BigEndian>().unwrap());
    }
    Ok(SampleSizes::PerSample(sizes))
}

fn parse_chunk_offsets(
    payload: &[u8],
    header: &BoxHeader,
    width: usize,
) -> Result<Vec<u64>, Mp4Error> {
    if payload.len() < 8 {
        return Err(truncated(
            header,
            format!("{} payload shorter than 8 bytes", header.box_type),
        ));
    }
    let count = checked_entry_count(payload, header, 8, width)?;
    let mut cur = Cursor::new(&payload[8..]);
    let mut offsets = Vec::with_capacity(count);
    for _ in 0..count {
        let v = if width == 4 {
            u64::from(cur.read_u32::<BigEndian>().unwrap())
        } else {
            cur.read_u64::<BigEndian>().unwrap()
        };
        offsets.push(v);
    }
    Ok(offsets)
}

fn parse_stsc(payload: &[u8], header: &BoxHeader) -> Result<Vec<StscEntry>, Mp4Error> {
    if payload.len() < 8 {
        return Err(truncated(header, "stsc payload shorter than 8 bytes".to_owned()));
    }
    let count = checked_entry_count(payload, header, 8, 12)?;
    let mut cur = Cursor::new(&payload[8..]);
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let first_chunk = cur.read_u32::<BigEndian>().unwrap();
        let samples_per_chunk = cur.read_u32::<BigEndian>().unwrap();
        let _sample_description_index = cur.read_u32::<BigEndian>().unwrap();
        entries.push(StscEntry {
            first_chunk,
            samples_per_chunk,
        });
    }
    Ok(entries)
}

fn parse_stts(payload: &[u8], header: &BoxHeader) -> Result<Vec<SttsEntry>, Mp4Error> {
    if payload.len() < 8 {
        return Err(truncated(header, "stts payload shorter than 8 bytes".to_owned()));
    }
    let count = checked_entry_count(payload, header, 8, 8)?;
    let mut cur = Cursor::new(&payload[8..]);
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let count = cur.read_u32::<BigEndian>().unwrap();
        let delta = cur.read_u32::<BigEndian>().unwrap();
        entries.push(SttsEntry { count, delta });
    }
    Ok(entries)
}

fn parse_mdhd<R: Read + Seek>(r: &mut R, header: &BoxHeader) -> Result<u32, Mp4Error> {
    // v0: version/flags (4), creation (4), modification (4), timescale (4)
    // v1: version/flags (4), creation (8), modification (8), timescale (4)
    let prefix = payload_prefix(r, header, 4)?;
    let (skip, need) = match prefix[0] {
        0 => (12usize, 16u64),
        1 => (20usize, 24u64),
        v => {
            return Err(Mp4Error::InconsistentTables(format!(
                "unsupported mdhd version {v}"
            )))
        }
    };
    let bytes = payload_prefix(r, header, need)?;
    let mut cur = Cursor::new(&bytes[skip..]);
    Ok(cur.read_u32::<BigEndian>().unwrap())
}
