//! Binary PGM/PPM (P5/P6) and the headered raw volume format.
//!
//! A raw volume is the ASCII line `ZVOL w h d channels bitdepth\n` followed
//! by the samples, slice by slice, each slice row-major with interleaved
//! channels. 16-bit samples are big-endian in both formats. A volume with
//! `d == 1` loads as a 2-D image `[h, w]`, otherwise as `[d, h, w]`.

use std::fs;
use std::path::Path;

use crate::blocking::{BitDepth, ImageVolume};
use crate::error::ImageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pnm,
    Zvol,
}

impl ImageFormat {
    /// Picks the on-disk format from the file extension, falling back to
    /// the volume's shape.
    pub fn for_path(path: &Path, volume: &ImageVolume) -> ImageFormat {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if matches!(ext.as_str(), "pgm" | "ppm" | "pnm") => ImageFormat::Pnm,
            Some(ext) if ext == "zvol" => ImageFormat::Zvol,
            _ if volume.ndim() == 2 && matches!(volume.channels(), 1 | 3) => ImageFormat::Pnm,
            _ => ImageFormat::Zvol,
        }
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageVolume, ImageError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_image(&bytes)
}

pub fn save_image(volume: &ImageVolume, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let bytes = match ImageFormat::for_path(path, volume) {
        ImageFormat::Pnm => encode_pnm(volume)?,
        ImageFormat::Zvol => encode_zvol(volume)?,
    };
    fs::write(path, bytes).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Decodes PNM or ZVOL data, chosen by the leading magic.
pub fn decode_image(bytes: &[u8]) -> Result<ImageVolume, ImageError> {
    if bytes.starts_with(b"ZVOL") {
        decode_zvol(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else {
        Err(ImageError::MalformedHeader(
            "expected P5, P6 or ZVOL magic".into(),
        ))
    }
}

struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.data.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| ImageError::MalformedHeader(format!("bad or missing {what}")))
    }

    /// Consumes the single whitespace byte that ends the header.
    fn end_of_header(&mut self) -> Result<(), ImageError> {
        match self.data.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ImageError::MalformedHeader(
                "header must end with one whitespace byte".into(),
            )),
        }
    }
}

fn read_samples(data: &[u8], count: usize, depth: BitDepth) -> Result<Vec<u16>, ImageError> {
    let expected = count
        .checked_mul(depth.bytes())
        .ok_or_else(|| ImageError::MalformedHeader("image too large".into()))?;
    if data.len() != expected {
        return Err(ImageError::SizeMismatch {
            expected,
            found: data.len(),
        });
    }
    Ok(match depth {
        BitDepth::Eight => data.iter().map(|&b| b as u16).collect(),
        BitDepth::Sixteen => data
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
    })
}

fn write_samples(out: &mut Vec<u8>, pixels: &[u16], depth: BitDepth) {
    match depth {
        BitDepth::Eight => out.extend(pixels.iter().map(|&p| p as u8)),
        BitDepth::Sixteen => {
            for &p in pixels {
                out.extend_from_slice(&p.to_be_bytes());
            }
        }
    }
}

fn depth_from_maxval(maxval: u32) -> Result<BitDepth, ImageError> {
    match maxval {
        255 => Ok(BitDepth::Eight),
        65535 => Ok(BitDepth::Sixteen),
        other => Err(ImageError::UnsupportedMaxval(other)),
    }
}

fn to_volume(
    extents: Vec<usize>,
    channels: usize,
    depth: BitDepth,
    pixels: Vec<u16>,
) -> Result<ImageVolume, ImageError> {
    ImageVolume::new(extents, channels, depth, pixels)
        .map_err(|e| ImageError::MalformedHeader(e.to_string()))
}

pub fn decode_pnm(bytes: &[u8]) -> Result<ImageVolume, ImageError> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(ImageError::MalformedHeader("expected P5 or P6".into())),
    };
    let mut r = HeaderReader { data: bytes, pos: 2 };
    let width = r.number("width")? as usize;
    let height = r.number("height")? as usize;
    let maxval = r.number("maxval")?;
    r.end_of_header()?;
    if width == 0 || height == 0 {
        return Err(ImageError::MalformedHeader("zero image dimension".into()));
    }
    let depth = depth_from_maxval(maxval)?;
    let pixels = read_samples(&bytes[r.pos..], width * height * channels, depth)?;
    to_volume(vec![height, width], channels, depth, pixels)
}

/// Encodes a 2-D image with 1 (P5) or 3 (P6) channels.
pub fn encode_pnm(volume: &ImageVolume) -> Result<Vec<u8>, ImageError> {
    let magic = match (volume.ndim(), volume.channels()) {
        (2, 1) => "P5",
        (2, 3) => "P6",
        (d, c) => {
            return Err(ImageError::Unsupported(format!(
                "PNM holds 2-D images with 1 or 3 channels, not {d}-D with {c}"
            )))
        }
    };
    let [h, w] = [volume.extents()[0], volume.extents()[1]];
    let depth = volume.bitdepth();
    let mut out = format!("{magic}\n{w} {h}\n{}\n", depth.max_value()).into_bytes();
    write_samples(&mut out, volume.pixels(), depth);
    Ok(out)
}

pub fn decode_zvol(bytes: &[u8]) -> Result<ImageVolume, ImageError> {
    if !bytes.starts_with(b"ZVOL") {
        return Err(ImageError::MalformedHeader("expected ZVOL".into()));
    }
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| ImageError::MalformedHeader("unterminated ZVOL header".into()))?;
    let line = std::str::from_utf8(&bytes[4..newline])
        .map_err(|_| ImageError::MalformedHeader("non-ASCII ZVOL header".into()))?;
    let fields: Vec<usize> = line
        .split_ascii_whitespace()
        .map(|f| f.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| ImageError::MalformedHeader(format!("bad ZVOL fields {line:?}")))?;
    let [w, h, d, channels, bits] = fields[..] else {
        return Err(ImageError::MalformedHeader(format!(
            "ZVOL header needs 5 fields, got {}",
            fields.len()
        )));
    };
    if w == 0 || h == 0 || d == 0 || channels == 0 || channels > 255 {
        return Err(ImageError::MalformedHeader(format!(
            "bad ZVOL sizes {w}x{h}x{d} with {channels} channels"
        )));
    }
    let depth = u8::try_from(bits)
        .ok()
        .and_then(BitDepth::from_bits)
        .ok_or_else(|| ImageError::MalformedHeader(format!("bit depth {bits}")))?;
    let count = [w, h, d, channels]
        .iter()
        .try_fold(1usize, |a, &b| a.checked_mul(b))
        .ok_or_else(|| ImageError::MalformedHeader("volume too large".into()))?;
    let pixels = read_samples(&bytes[newline + 1..], count, depth)?;
    let extents = if d == 1 { vec![h, w] } else { vec![d, h, w] };
    to_volume(extents, channels, depth, pixels)
}

/// Encodes a 2-D or 3-D volume.
pub fn encode_zvol(volume: &ImageVolume) -> Result<Vec<u8>, ImageError> {
    let e = volume.extents();
    let (w, h, d) = match e.len() {
        2 => (e[1], e[0], 1),
        3 if e[0] > 1 => (e[2], e[1], e[0]),
        _ => {
            return Err(ImageError::Unsupported(format!(
                "ZVOL holds 2-D images or 3-D volumes with depth > 1, not extents {e:?}"
            )))
        }
    };
    let depth = volume.bitdepth();
    let mut out = format!("ZVOL {w} {h} {d} {} {}\n", volume.channels(), depth.bits()).into_bytes();
    write_samples(&mut out, volume.pixels(), depth);
    Ok(out)
}
