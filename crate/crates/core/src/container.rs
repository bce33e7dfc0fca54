//! The `.zipr` container.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic        4 bytes  "ZIPR"
//! version      u8       1
//! transform    u8       0 zip, 1 zip-interlace, 2 dct, 3 fwht
//! ndim         u8       >= 1
//! extents      u32 * ndim, slowest axis first
//! channels     u8
//! bitdepth     u8       8 or 16
//! block size   u16      >= 2
//! step         f64      IEEE-754, > 0
//! per channel:
//!   n          u32      code table entries
//!   n * (symbol: zigzag LEB128 varint, length: u8), canonical order
//!   bit count  u64
//!   payload    ceil(bit count / 8) bytes, MSB-first, zero padded
//! ```

use crate::entropy::{BitPayload, HuffmanCode, MAX_CODE_LEN};
use crate::error::{CodingError, ContainerError};
use crate::transform::TransformKind;

pub const MAGIC: [u8; 4] = *b"ZIPR";
pub const VERSION: u8 = 1;

/// Size of the fixed header for `ndim` dimensions, before any channel data.
pub fn header_len(ndim: usize) -> usize {
    4 + 1 + 1 + 1 + 4 * ndim + 1 + 1 + 2 + 8
}

/// Code table and payload of one channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelStream {
    pub code: HuffmanCode,
    pub payload: BitPayload,
}

impl ChannelStream {
    /// Serialized size of the table and payload, including their length fields.
    pub fn encoded_len(&self) -> usize {
        let table: usize = self
            .code
            .entries()
            .iter()
            .map(|&(s, _)| varint_len(zigzag(s)) + 1)
            .sum();
        4 + table + 8 + self.payload.bytes.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedArtifact {
    pub transform: TransformKind,
    pub extents: Vec<u32>,
    pub bitdepth: u8,
    pub block_size: u16,
    pub step: f64,
    pub channels: Vec<ChannelStream>,
}

impl CompressedArtifact {
    pub fn payload_bytes(&self) -> usize {
        self.channels.iter().map(|c| c.payload.bytes.len()).sum()
    }

    pub fn encoded_len(&self) -> usize {
        header_len(self.extents.len())
            + self.channels.iter().map(ChannelStream::encoded_len).sum::<usize>()
    }
}

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

fn varint_len(mut v: u64) -> usize {
    let mut n = 1;
    while v >= 0x80 {
        v >>= 7;
        n += 1;
    }
    n
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Serializes `artifact`. Panics if it has more than 255 channels or
/// dimensions, which no constructor in this crate produces.
pub fn serialize(artifact: &CompressedArtifact) -> Vec<u8> {
    let mut out = Vec::with_capacity(artifact.encoded_len());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(artifact.transform.id());
    out.push(u8::try_from(artifact.extents.len()).expect("at most 255 dimensions"));
    for &e in &artifact.extents {
        out.extend_from_slice(&e.to_le_bytes());
    }
    out.push(u8::try_from(artifact.channels.len()).expect("at most 255 channels"));
    out.push(artifact.bitdepth);
    out.extend_from_slice(&artifact.block_size.to_le_bytes());
    out.extend_from_slice(&artifact.step.to_le_bytes());
    for ch in &artifact.channels {
        let entries = ch.code.entries();
        out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
        for &(s, l) in entries {
            put_varint(&mut out, zigzag(s));
            out.push(l);
        }
        out.extend_from_slice(&ch.payload.bit_count.to_le_bytes());
        out.extend_from_slice(&ch.payload.bytes);
    }
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], ContainerError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or(ContainerError::Truncated(what))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, ContainerError> {
        Ok(self.take(1, what)?[0])
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], ContainerError> {
        Ok(self.take(N, what)?.try_into().unwrap())
    }

    fn varint(&mut self, what: &'static str) -> Result<u64, ContainerError> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.u8(what)?;
            let bits = (b & 0x7f) as u64;
            if shift == 63 && bits > 1 {
                return Err(ContainerError::InvalidHeader(format!("{what}: varint overflow")));
            }
            v |= bits << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(ContainerError::InvalidHeader(format!("{what}: varint overflow")))
    }
}

/// Parses and fully validates a container.
pub fn parse(bytes: &[u8]) -> Result<CompressedArtifact, ContainerError> {
    let mut c = Cursor { data: bytes, pos: 0 };
    let magic: [u8; 4] = c.array("magic")?;
    if magic != MAGIC {
        return Err(ContainerError::BadMagic(magic));
    }
    let version = c.u8("version")?;
    if version != VERSION {
        return Err(ContainerError::UnsupportedVersion(version));
    }
    let tid = c.u8("transform id")?;
    let transform = TransformKind::from_id(tid)
        .ok_or_else(|| ContainerError::InvalidHeader(format!("unknown transform id {tid}")))?;
    let ndim = c.u8("dimension count")? as usize;
    if ndim == 0 {
        return Err(ContainerError::InvalidHeader("zero dimensions".into()));
    }
    let mut extents = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        let e = u32::from_le_bytes(c.array("extents")?);
        if e == 0 {
            return Err(ContainerError::InvalidHeader("zero extent".into()));
        }
        extents.push(e);
    }
    let channels = c.u8("channel count")? as usize;
    let bitdepth = c.u8("bit depth")?;
    if bitdepth != 8 && bitdepth != 16 {
        return Err(ContainerError::InvalidHeader(format!("bit depth {bitdepth}")));
    }
    let block_size = u16::from_le_bytes(c.array("block size")?);
    if block_size < 2 {
        return Err(ContainerError::InvalidHeader(format!("block size {block_size}")));
    }
    if transform == TransformKind::Fwht && !block_size.is_power_of_two() {
        return Err(ContainerError::InvalidHeader(format!(
            "fwht with non-power-of-two block size {block_size}"
        )));
    }
    let step = f64::from_le_bytes(c.array("quantizer step")?);
    if !(step.is_finite() && step > 0.0) {
        return Err(ContainerError::InvalidHeader(format!("quantizer step {step}")));
    }

    let mut streams = Vec::with_capacity(channels);
    for channel in 0..channels {
        let n = u32::from_le_bytes(c.array("table size")?) as usize;
        if n == 0 {
            return Err(ContainerError::InvalidTable {
                channel,
                reason: "empty table".into(),
            });
        }
        // Each entry takes at least two bytes.
        if n > (bytes.len() - c.pos) / 2 {
            return Err(ContainerError::Truncated("code table"));
        }
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let s = unzigzag(c.varint("code table")?);
            let l = c.u8("code table")?;
            if l == 0 || l > MAX_CODE_LEN {
                return Err(ContainerError::InvalidTable {
                    channel,
                    reason: format!("symbol {s} has length {l}"),
                });
            }
            entries.push((s, l));
        }
        if entries.windows(2).any(|w| (w[0].1, w[0].0) >= (w[1].1, w[1].0)) {
            return Err(ContainerError::InvalidTable {
                channel,
                reason: "entries are not in canonical order".into(),
            });
        }
        let code = HuffmanCode::from_lengths(entries).map_err(|e| match e {
            CodingError::KraftViolation => ContainerError::KraftViolation(channel),
            other => ContainerError::InvalidTable {
                channel,
                reason: other.to_string(),
            },
        })?;
        let bit_count = u64::from_le_bytes(c.array("payload bit count")?);
        let byte_len = usize::try_from(bit_count.div_ceil(8))
            .map_err(|_| ContainerError::Truncated("payload"))?;
        let payload = BitPayload {
            bytes: c.take(byte_len, "payload")?.to_vec(),
            bit_count,
        };
        payload
            .validate()
            .map_err(|reason| ContainerError::InvalidPayload { channel, reason })?;
        streams.push(ChannelStream { code, payload });
    }
    if c.pos != bytes.len() {
        return Err(ContainerError::TrailingBytes(bytes.len() - c.pos));
    }
    Ok(CompressedArtifact {
        transform,
        extents,
        bitdepth,
        block_size,
        step,
        channels: streams,
    })
}
