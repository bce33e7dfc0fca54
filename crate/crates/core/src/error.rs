use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the 1-D and N-D transform kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("spectrum is not conjugate-symmetric (imaginary residue {residue:e} exceeds {tolerance:e})")]
    SymmetryViolation { residue: f64, tolerance: f64 },
    #[error("length {0} is not a power of two")]
    NonPowerOfTwo(usize),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
}

/// Errors raised while building, writing or reading Huffman-coded streams.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodingError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("symbol {0} is not in the code alphabet")]
    UnknownSymbol(i64),
    #[error("payload truncated after {decoded} of {expected} symbols")]
    Truncated { decoded: usize, expected: usize },
    #[error("payload holds {0} unused bits after the last symbol")]
    TrailingBits(u64),
    #[error("bit pattern does not match any codeword")]
    InvalidCodeword,
    #[error("code lengths violate the Kraft equality")]
    KraftViolation,
}

/// Integrity failures detected while parsing a `.zipr` container or
/// reassembling a block grid.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContainerError {
    #[error("bad magic bytes {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("unexpected end of data while reading {0}")]
    Truncated(&'static str),
    #[error("invalid header field: {0}")]
    InvalidHeader(String),
    #[error("code table for channel {channel} is invalid: {reason}")]
    InvalidTable { channel: usize, reason: String },
    #[error("code table for channel {0} violates the Kraft equality")]
    KraftViolation(usize),
    #[error("payload for channel {channel}: {reason}")]
    InvalidPayload { channel: usize, reason: String },
    #[error("{0} trailing bytes after the last channel")]
    TrailingBytes(usize),
    #[error("corrupted block grid: {0}")]
    CorruptGrid(String),
}

/// Errors raised by the image readers and writers.
#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (expected 255 or 65535)")]
    UnsupportedMaxval(u32),
    #[error("size mismatch: header declares {expected} sample bytes, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("unsupported image: {0}")]
    Unsupported(String),
}

/// Top-level error for the codec pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
