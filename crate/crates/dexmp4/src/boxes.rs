use std::fmt;
use std::io::{Read, Seek, SeekFrom};

use byteorder::{BigEndian, ReadBytesExt};

use crate::error::Mp4Error;

/// Box types whose payload is a sequence of child boxes. Only the chain we
/// need for sample-table extraction is descended into; everything else is
/// kept as a leaf so unknown or huge boxes (`mdat`) are never materialized.
const CONTAINER_TYPES: [&[u8; 4]; 5] = [b"moov", b"trak", b"mdia", b"minf", b"stbl"];

/// Nesting guard; the deepest chain we care about is
/// moov/trak/mdia/minf/stbl (five levels).
const MAX_DEPTH: u32 = 8;

/// Four-character box type code, e.g. `moov` or `stsz`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FourCc(pub [u8; 4]);

impl FourCc {
    pub const fn new(code: &[u8; 4]) -> Self {
        FourCc(*code)
    }

    pub fn is(&self, code: &[u8; 4]) -> bool {
        &self.0 == code
    }
}

impl fmt::Display for FourCc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            if b.is_ascii_graphic() || b == b' ' {
                write!(f, "{}", b as char)?;
            } else {
                write!(f, "\\x{b:02x}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FourCc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FourCc({self})")
    }
}

/// One parsed box header with its 64-bit size already resolved.
#[derive(Debug, Clone, Copy)]
pub struct BoxHeader {
    pub box_type: FourCc,
    /// Absolute file offset of the first header byte.
    pub offset: u64,
    /// Total box size in bytes, header included.
    pub size: u64,
    /// 8 for compact headers, 16 when a `largesize` field is present.
    pub header_len: u8,
}

impl BoxHeader {
    pub fn payload_offset(&self) -> u64 {
        self.offset + u64::from(self.header_len)
    }

    pub fn payload_len(&self) -> u64 {
        self.size - u64::from(self.header_len)
    }

    /// Absolute offset one past the last byte of the box.
    pub fn end(&self) -> u64 {
        self.offset + self.size
    }
}

/// A box plus its children (empty for leaves).
#[derive(Debug)]
pub struct BoxNode {
    pub header: BoxHeader,
    pub children: Vec<BoxNode>,
}

impl BoxNode {
    /// First direct child with the given type.
    pub fn child(&self, code: &[u8; 4]) -> Option<&BoxNode> {
        self.children.iter().find(|c| c.header.box_type.is(code))
    }

    /// All direct children with the given type.
    pub fn children_of<'a>(&'a self, code: &'a [u8; 4]) -> impl Iterator<Item = &'a BoxNode> {
        self.children
            .iter()
            .filter(move |c| c.header.box_type.is(code))
    }

    /// Walk a chain of child types, e.g. `[b"mdia", b"minf", b"stbl"]`.
    pub fn find_path(&self, path: &[&[u8; 4]]) -> Option<&BoxNode> {
        let mut node = self;
        for code in path {
            node = node.child(code)?;
        }
        Some(node)
    }
}

/// The top-level box sequence of a file.
#[derive(Debug)]
pub struct BoxTree {
    pub roots: Vec<BoxNode>,
}

impl BoxTree {
    /// First top-level box with the given type.
    pub fn root(&self, code: &[u8; 4]) -> Option<&BoxNode> {
        self.roots.iter().find(|n| n.header.box_type.is(code))
    }

    pub fn moov(&self) -> Result<&BoxNode, Mp4Error> {
        self.root(b"moov").ok_or(Mp4Error::NoMoov)
    }
}

fn is_container(code: FourCc) -> bool {
    CONTAINER_TYPES.iter().any(|c| code.is(c))
}

/// Read one box header starting at `offset`; the box must fit entirely
/// inside `offset..end` (the enclosing container or the file).
fn read_header<R: Read + Seek>(r: &mut R, offset: u64, end: u64) -> Result<BoxHeader, Mp4Error> {
    if end - offset < 8 {
        return Err(Mp4Error::TruncatedBox {
            offset,
            detail: format!("{} bytes left, need 8 for a box header", end - offset),
        });
    }
    r.seek(SeekFrom::Start(offset))?;
    let size32 = r.read_u32::<BigEndian>()?;
    let mut code = [0u8; 4];
    r.read_exact(&mut code)?;
    let box_type = FourCc(code);

    let (size, header_len) = match size32 {
        // size 0: box extends to the end of the enclosing space
        0 => (end - offset, 8u8),
        // size 1: 64-bit size follows the type code
        1 => {
            if end - offset < 16 {
                return Err(Mp4Error::TruncatedBox {
                    offset,
                    detail: "largesize header needs 16 bytes".to_owned(),
                });
            }
            (r.read_u64::<BigEndian>()?, 16u8)
        }
        n => (u64::from(n), 8u8),
    };

    if size < u64::from(header_len) {
        return Err(Mp4Error::TruncatedBox {
            offset,
            detail: format!("declared size {size} is smaller than the {header_len}-byte header"),
        });
    }
    let box_end = offset
        .checked_add(size)
        .ok_or(Mp4Error::LargesizeOverflow { offset })?;
    if box_end > end {
        return Err(Mp4Error::TruncatedBox {
            offset,
            detail: format!("box of size {size} extends past offset {end}"),
        });
    }

    Ok(BoxHeader {
        box_type,
        offset,
        size,
        header_len,
    })
}

fn parse_siblings<R: Read + Seek>(
    r: &mut R,
    start: u64,
    end: u64,
    depth: u32,
) -> Result<Vec<BoxNode>, Mp4Error> {
    let mut nodes = Vec::new();
    let mut offset = start;
    while offset < end {
        let header = read_header(r, offset, end)?;
        let children = if depth < MAX_DEPTH && is_container(header.box_type) {
            parse_siblings(r, header.payload_offset(), header.end(), depth + 1)?
        } else {
            Vec::new()
        };
        offset = header.end();
        nodes.push(BoxNode { header, children });
    }
    Ok(nodes)
}

/// Parse the complete box tree of an mp4 file.
///
/// Fails with [`Mp4Error::NoMoov`] when the file has no `moov` box and with
/// [`Mp4Error::UnsupportedFragmented`] when movie fragments (`moof`) or the
/// fragment declaration (`mvex`) are present. Every byte range is checked
/// against the file length before it is read.
pub fn parse_boxes<R: Read + Seek>(r: &mut R) -> Result<BoxTree, Mp4Error> {
    let file_len = r.seek(SeekFrom::End(0))?;
    if file_len < 8 {
        return Err(Mp4Error::TruncatedBox {
            offset: 0,
            detail: format!("file is {file_len} bytes, need at least one box header"),
        });
    }
    let roots = parse_siblings(r, 0, file_len, 0)?;

    if roots.iter().any(|n| n.header.box_type.is(b"moof")) {
        return Err(Mp4Error::UnsupportedFragmented);
    }
    let moov = roots
        .iter()
        .find(|n| n.header.box_type.is(b"moov"))
        .ok_or(Mp4Error::NoMoov)?;
    if moov.child(b"mvex").is_some() {
        return Err(Mp4Error::UnsupportedFragmented);
    }

    Ok(BoxTree { roots })
}

/// Read the first `len` bytes of a box payload. The payload extent was
/// verified against the file length when the header was parsed, so the
/// only new check is that the payload is long enough.
pub(crate) fn payload_prefix<R: Read + Seek>(
    r: &mut R,
    header: &BoxHeader,
    len: u64,
) -> Result<Vec<u8>, Mp4Error> {
    if header.payload_len() < len {
        return Err(Mp4Error::TruncatedBox {
            offset: header.offset,
            detail: format!(
                "{} payload is {} bytes, need {len}",
                header.box_type,
                header.payload_len()
            ),
        });
    }
    r.seek(SeekFrom::Start(header.payload_offset()))?;
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Read a full box payload. Allocation is bounded by the payload bytes
/// actually present in the file (the extent check happened at parse time).
pub(crate) fn full_payload<R: Read + Seek>(
    r: &mut R,
    header: &BoxHeader,
) -> Result<Vec<u8>, Mp4Error> {
    payload_prefix(r, header, header.payload_len())
}
