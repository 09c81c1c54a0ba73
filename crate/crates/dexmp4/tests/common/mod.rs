//! Minimal mp4 box writer used to build test fixtures. Kept independent of
//! the parser on purpose: it assembles boxes with its own byte-level code
//! so writer bugs and parser bugs cannot cancel out.

// shared by several test binaries; not every binary uses every helper
#![allow(dead_code)]

/// Samples-per-chunk layout plus timing for one synthetic video track.
pub struct FixtureSpec {
    pub timescale: u32,
    /// Per-sample payload sizes; chunk boundaries come from `chunks`.
    pub sample_sizes: Vec<u32>,
    /// Number of samples in each chunk; must sum to `sample_sizes.len()`.
    pub chunks: Vec<u32>,
    /// stts runs (count, delta); counts must sum to the sample count.
    pub stts: Vec<(u32, u32)>,
    /// Write stsz in uniform mode (requires all sizes equal).
    pub uniform_stsz: bool,
    /// Write chunk offsets as co64 instead of stco.
    pub co64: bool,
    /// Put a non-video (audio) track before the video track.
    pub audio_track_first: bool,
}

impl FixtureSpec {
    /// Uniform-rate fixture: `n` samples of `size` bytes in one chunk.
    pub fn simple(n: u32, size: u32, timescale: u32) -> Self {
        FixtureSpec {
            timescale,
            sample_sizes: vec![size; n as usize],
            chunks: vec![n],
            stts: vec![(n, 1)],
            uniform_stsz: true,
            co64: false,
            audio_track_first: false,
        }
    }
}

pub fn leaf(box_type: &[u8; 4], payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + payload.len());
    out.extend_from_slice(&((8 + payload.len()) as u32).to_be_bytes());
    out.extend_from_slice(box_type);
    out.extend_from_slice(payload);
    out
}

pub fn container(box_type: &[u8; 4], children: &[Vec<u8>]) -> Vec<u8> {
    leaf(box_type, &children.concat())
}

/// Full-box payload: version and 24-bit flags, then the body.
pub fn full_box(version: u8, body: &[u8]) -> Vec<u8> {
    let mut out = vec![version, 0, 0, 0];
    out.extend_from_slice(body);
    out
}

fn hdlr(handler: &[u8; 4]) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(&[0u8; 4]); // pre_defined
    body.extend_from_slice(handler);
    body.extend_from_slice(&[0u8; 12]); // reserved
    body.extend_from_slice(b"Handler\0");
    leaf(b"hdlr", &full_box(0, &body))
}

fn mdhd(timescale: u32, duration: u32) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(&[0u8; 8]); // creation + modification
    body.extend_from_slice(&timescale.to_be_bytes());
    body.extend_from_slice(&duration.to_be_bytes());
    body.extend_from_slice(&[0x55, 0xC4, 0, 0]); // language "und" + pre_defined
    leaf(b"mdhd", &full_box(0, &body))
}

fn stsz(spec: &FixtureSpec) -> Vec<u8> {
    let mut body = Vec::new();
    if spec.uniform_stsz {
        let size = spec.sample_sizes.first().copied().unwrap_or(0);
        assert!(
            spec.sample_sizes.iter().all(|&s| s == size),
            "uniform stsz needs equal sizes"
        );
        body.extend_from_slice(&size.to_be_bytes());
        body.extend_from_slice(&(spec.sample_sizes.len() as u32).to_be_bytes());
    } else {
        body.extend_from_slice(&0u32.to_be_bytes());
        body.extend_from_slice(&(spec.sample_sizes.len() as u32).to_be_bytes());
        for &s in &spec.sample_sizes {
            body.extend_from_slice(&s.to_be_bytes());
        }
    }
    leaf(b"stsz", &full_box(0, &body))
}

/// Run-length encode the per-chunk sample counts into canonical stsc runs.
fn stsc(spec: &FixtureSpec) -> Vec<u8> {
    let mut runs: Vec<(u32, u32)> = Vec::new();
    for (i, &count) in spec.chunks.iter().enumerate() {
        match runs.last() {
            Some(&(_, prev)) if prev == count => {}
            _ => runs.push((i as u32 + 1, count)),
        }
    }
    let mut body = Vec::new();
    body.extend_from_slice(&(runs.len() as u32).to_be_bytes());
    for (first_chunk, samples_per_chunk) in runs {
        body.extend_from_slice(&first_chunk.to_be_bytes());
        body.extend_from_slice(&samples_per_chunk.to_be_bytes());
        body.extend_from_slice(&1u32.to_be_bytes()); // sample_description_index
    }
    leaf(b"stsc", &full_box(0, &body))
}

fn stts(spec: &FixtureSpec) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(&(spec.stts.len() as u32).to_be_bytes());
    for &(count, delta) in &spec.stts {
        body.extend_from_slice(&count.to_be_bytes());
        body.extend_from_slice(&delta.to_be_bytes());
    }
    leaf(b"stts", &full_box(0, &body))
}

fn chunk_offset_box(offsets: &[u64], co64: bool) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(&(offsets.len() as u32).to_be_bytes());
    for &o in offsets {
        if co64 {
            body.extend_from_slice(&o.to_be_bytes());
        } else {
            body.extend_from_slice(&u32::try_from(o).expect("stco offset fits u32").to_be_bytes());
        }
    }
    leaf(if co64 { b"co64" } else { b"stco" }, &full_box(0, &body))
}

fn audio_trak() -> Vec<u8> {
    let stbl = container(
        b"stbl",
        &[
            stts(&FixtureSpec::simple(0, 0, 1)),
            stsc(&FixtureSpec::simple(0, 0, 1)),
            stsz(&FixtureSpec::simple(0, 0, 1)),
            chunk_offset_box(&[], false),
        ],
    );
    let minf = container(b"minf", &[stbl]);
    let mdia = container(b"mdia", &[mdhd(8000, 0), hdlr(b"soun"), minf]);
    container(b"trak", &[mdia])
}

/// Layout of a built fixture: the file bytes plus where mdat's payload
/// (the sample data) lives, for range cross-checks in tests.
pub struct Fixture {
    pub bytes: Vec<u8>,
    pub mdat_payload_start: u64,
    pub mdat_payload_end: u64,
}

/// Assemble a complete unfragmented mp4: ftyp, mdat with one dummy payload
/// byte pattern per sample, then moov referencing absolute chunk offsets.
/// Writing mdat before moov keeps offset computation single-pass.
pub fn build_mp4(spec: &FixtureSpec) -> Fixture {
    let total: u32 = spec.chunks.iter().sum();
    assert_eq!(total as usize, spec.sample_sizes.len(), "chunks must cover all samples");
    let stts_total: u32 = spec.stts.iter().map(|&(c, _)| c).sum();
    assert_eq!(stts_total as usize, spec.sample_sizes.len(), "stts must cover all samples");

    let ftyp = leaf(b"ftyp", b"isom\x00\x00\x02\x00isomiso2");

    // sample data: sample i filled with byte (i % 251), chunk-contiguous
    let mut mdat_payload = Vec::new();
    let mut chunk_offsets = Vec::new();
    let mdat_payload_start = ftyp.len() as u64 + 8;
    let mut sample = 0usize;
    for &in_chunk in &spec.chunks {
        chunk_offsets.push(mdat_payload_start + mdat_payload.len() as u64);
        for _ in 0..in_chunk {
            let fill = (sample % 251) as u8;
            let new_len = mdat_payload.len() + spec.sample_sizes[sample] as usize;
            mdat_payload.resize(new_len, fill);
            sample += 1;
        }
    }
    let mdat = leaf(b"mdat", &mdat_payload);

    let stbl = container(
        b"stbl",
        &[
            leaf(b"stsd", &full_box(0, &1u32.to_be_bytes())), // opaque to the parser
            stts(spec),
            stsc(spec),
            stsz(spec),
            chunk_offset_box(&chunk_offsets, spec.co64),
        ],
    );
    let minf = container(b"minf", &[stbl]);
    let duration: u32 = spec.stts.iter().map(|&(c, d)| c * d).sum();
    let mdia = container(b"mdia", &[mdhd(spec.timescale, duration), hdlr(b"vide"), minf]);
    let video_trak = container(b"trak", &[mdia]);

    let traks = if spec.audio_track_first {
        vec![audio_trak(), video_trak]
    } else {
        vec![video_trak]
    };
    let moov = container(b"moov", &traks);

    let mut bytes = ftyp;
    bytes.extend_from_slice(&mdat);
    let mdat_payload_end = bytes.len() as u64;
    bytes.extend_from_slice(&moov);

    Fixture {
        bytes,
        mdat_payload_start,
        mdat_payload_end,
    }
}
