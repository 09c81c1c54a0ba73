//! A stand-in codec that writes real ISO-BMFF mp4 files.
//!
//! Each sample stores one source image *file* losslessly, prefixed
//! with a one-byte tag:
//!
//! * `0x00` — identical to the previous frame (the payload is just the
//!   tag), which is what makes low-motion sequences cheap;
//! * `0x01` — deflate-compressed file bytes;
//! * `0x02` — raw file bytes (used when compression does not help).
//!
//! The container carries a full sample table (`stts`/`stsc`/`stsz`/
//! `stco`), a `vide` handler and an mdhd timescale equal to the frame
//! rate, so the files probe and index exactly like encoder output.

use std::fs;
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, WriteBytesExt};
use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;

use crate::error::ConvertError;

const TAG_REPEAT: u8 = 0x00;
const TAG_DEFLATE: u8 = 0x01;
const TAG_RAW: u8 = 0x02;

fn boxed(fourcc: &[u8; 4], payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 8);
    out.write_u32::<BigEndian>(payload.len() as u32 + 8).unwrap();
    out.extend_from_slice(fourcc);
    out.extend_from_slice(payload);
    out
}

fn container(fourcc: &[u8; 4], children: &[Vec<u8>]) -> Vec<u8> {
    let payload: Vec<u8> = children.concat();
    boxed(fourcc, &payload)
}

fn full_box_payload(entries: impl FnOnce(&mut Vec<u8>)) -> Vec<u8> {
    let mut payload = vec![0u8; 4]; // version 0, flags 0
    entries(&mut payload);
    payload
}

fn encode_frame(bytes: &[u8], previous: Option<&[u8]>) -> Vec<u8> {
    if previous == Some(bytes) {
        return vec![TAG_REPEAT];
    }
    let mut encoder = DeflateEncoder::new(vec![TAG_DEFLATE], Compression::default());
    encoder.write_all(bytes).expect("writing to a Vec");
    let compressed = encoder.finish().expect("finishing a Vec");
    if compressed.len() < bytes.len() + 1 {
        compressed
    } else {
        let mut raw = Vec::with_capacity(bytes.len() + 1);
        raw.push(TAG_RAW);
        raw.extend_from_slice(bytes);
        raw
    }
}

/// Encode `images` (one file per frame, in order) into an mp4 at
/// `output`. `limit_frames` truncates the encoded frame count, which
/// exists purely so tests can fault-inject a lying encoder.
pub fn encode(
    images: &[PathBuf],
    fps: u32,
    output: &Path,
    limit_frames: Option<u64>,
) -> Result<(), ConvertError> {
    let keep = match limit_frames {
        Some(limit) => (images.len() as u64).min(limit) as usize,
        None => images.len(),
    };

    let mut samples: Vec<Vec<u8>> = Vec::with_capacity(keep);
    let mut previous: Option<Vec<u8>> = None;
    for path in &images[..keep] {
        let bytes = fs::read(path).map_err(|e| ConvertError::io(path, e))?;
        samples.push(encode_frame(&bytes, previous.as_deref()));
        previous = Some(bytes);
    }

    let ftyp = {
        let mut p = Vec::new();
        p.extend_from_slice(b"isom");
        p.write_u32::<BigEndian>(0).unwrap(); // minor version
        p.extend_from_slice(b"isom");
        boxed(b"ftyp", &p)
    };

    let mdat_payload: Vec<u8> = samples.concat();
    let mdat = boxed(b"mdat", &mdat_payload);
    let chunk_offset = ftyp.len() as u64 + 8; // first sample byte

    let n = samples.len() as u32;
    let timescale = fps.max(1);

    let mdhd = boxed(
        b"mdhd",
        &full_box_payload(|p| {
            p.write_u32::<BigEndian>(0).unwrap(); // creation
            p.write_u32::<BigEndian>(0).unwrap(); // modification
            p.write_u32::<BigEndian>(timescale).unwrap();
            p.write_u32::<BigEndian>(n).unwrap(); // duration, one tick per frame
            p.write_u16::<BigEndian>(0x55c4).unwrap(); // language "und"
            p.write_u16::<BigEndian>(0).unwrap();
        }),
    );

    let hdlr = boxed(
        b"hdlr",
        &full_box_payload(|p| {
            p.write_u32::<BigEndian>(0).unwrap(); // pre_defined
            p.extend_from_slice(b"vide");
            p.extend_from_slice(&[0u8; 12]); // reserved
            p.extend_from_slice(b"stub\0");
        }),
    );

    let stts = boxed(
        b"stts",
        &full_box_payload(|p| {
            if n == 0 {
                p.write_u32::<BigEndian>(0).unwrap();
            } else {
                p.write_u32::<BigEndian>(1).unwrap();
                p.write_u32::<BigEndian>(n).unwrap(); // sample count
                p.write_u32::<BigEndian>(1).unwrap(); // delta per sample
            }
        }),
    );

    let stsc = boxed(
        b"stsc",
        &full_box_payload(|p| {
            if n == 0 {
                p.write_u32::<BigEndian>(0).unwrap();
            } else {
                p.write_u32::<BigEndian>(1).unwrap();
                p.write_u32::<BigEndian>(1).unwrap(); // first_chunk
                p.write_u32::<BigEndian>(n).unwrap(); // samples_per_chunk
                p.write_u32::<BigEndian>(1).unwrap(); // sample_description_index
            }
        }),
    );

    let stsz = boxed(
        b"stsz",
        &full_box_payload(|p| {
            p.write_u32::<BigEndian>(0).unwrap(); // per-sample sizes follow
            p.write_u32::<BigEndian>(n).unwrap();
            for sample in &samples {
                p.write_u32::<BigEndian>(sample.len() as u32).unwrap();
            }
        }),
    );

    let stco = boxed(
        b"stco",
        &full_box_payload(|p| {
            if n == 0 {
                p.write_u32::<BigEndian>(0).unwrap();
            } else {
                p.write_u32::<BigEndian>(1).unwrap();
                p.write_u32::<BigEndian>(chunk_offset as u32).unwrap();
            }
        }),
    );

    let stbl = container(b"stbl", &[stts, stsc, stsz, stco]);
    let minf = container(b"minf", &[stbl]);
    let mdia = container(b"mdia", &[mdhd, hdlr, minf]);
    let trak = container(b"trak", &[mdia]);
    let moov = container(b"moov", &[trak]);

    let mut file = fs::File::create(output).map_err(|e| ConvertError::io(output, e))?;
    for part in [&ftyp, &mdat, &moov] {
        file.write_all(part).map_err(|e| ConvertError::io(output, e))?;
    }
    Ok(())
}

fn frame_extension(bytes: &[u8]) -> &'static str {
    if bytes.starts_with(b"P6") {
        "ppm"
    } else if bytes.starts_with(b"\x89PNG") {
        "png"
    } else {
        "bin"
    }
}

/// Decode every frame of a stub-encoded mp4 into `output_dir`, one
/// file per frame named `frame_{idx:05}.{ext}`. Returns the written
/// paths in frame order.
pub fn decode(input: &Path, output_dir: &Path) -> Result<Vec<PathBuf>, ConvertError> {
    let mismatch = |detail: String| ConvertError::DecodeMismatch {
        video: input.to_path_buf(),
        detail,
    };

    let (_, table) = dexmp4::index_video(input).map_err(|e| ConvertError::mp4(input, e))?;
    let mut file = fs::File::open(input).map_err(|e| ConvertError::io(input, e))?;
    fs::create_dir_all(output_dir).map_err(|e| ConvertError::io(output_dir, e))?;

    let mut written = Vec::with_capacity(table.entries().len());
    let mut previous: Option<Vec<u8>> = None;
    for (i, entry) in table.entries().iter().enumerate() {
        file.seek(SeekFrom::Start(entry.byte_offset))
            .map_err(|e| ConvertError::io(input, e))?;
        let mut sample = vec![0u8; entry.byte_len as usize];
        file.read_exact(&mut sample)
            .map_err(|e| ConvertError::io(input, e))?;

        let (&tag, body) = sample
            .split_first()
            .ok_or_else(|| mismatch(format!("frame {i} has an empty sample")))?;
        let bytes = match tag {
            TAG_REPEAT => previous
                .clone()
                .ok_or_else(|| mismatch(format!("frame {i} repeats with no previous frame")))?,
            TAG_DEFLATE => {
                let mut decoded = Vec::new();
                DeflateDecoder::new(body)
                    .read_to_end(&mut decoded)
                    .map_err(|e| mismatch(format!("frame {i} fails to inflate: {e}")))?;
                decoded
            }
            TAG_RAW => body.to_vec(),
            other => return Err(mismatch(format!("frame {i} has unknown tag {other:#04x}"))),
        };

        let out = output_dir.join(format!("frame_{i:05}.{}", frame_extension(&bytes)));
        fs::write(&out, &bytes).map_err(|e| ConvertError::io(&out, e))?;
        written.push(out);
        previous = Some(bytes);
    }
    Ok(written)
}
