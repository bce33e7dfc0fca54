//! End-to-end pipeline: tile, transform, quantize, Huffman-code, and back.

use rayon::prelude::*;

use crate::blocking::{self, BitDepth, Block, BlockGrid, ImageVolume, NdTransform};
use crate::container::{self, ChannelStream, CompressedArtifact};
use crate::entropy::{self, SymbolHistogram};
use crate::error::{Error, Result};
use crate::quantize::{self, QuantizerConfig};
use crate::transform::TransformKind;

/// Block sizes swept by the benchmark harness.
pub const BLOCK_SIZES: [usize; 6] = [4, 8, 16, 32, 64, 128];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    pub transform: TransformKind,
    pub block_size: usize,
    pub step: f64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            transform: TransformKind::ZipConcat,
            block_size: 8,
            step: 1.0,
        }
    }
}

impl CodecConfig {
    pub fn new(transform: TransformKind, block_size: usize, step: f64) -> Self {
        CodecConfig {
            transform,
            block_size,
            step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size < 2 {
            return Err(Error::Config(format!(
                "block size {} must be at least 2",
                self.block_size
            )));
        }
        if self.block_size > u16::MAX as usize {
            return Err(Error::Config(format!("block size {} exceeds 65535", self.block_size)));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Config(format!(
                "quantizer step {} must be positive and finite",
                self.step
            )));
        }
        if !self.transform.supports_len(self.block_size) {
            return Err(Error::Config(format!(
                "{} requires a power-of-two block size, got {}",
                self.transform, self.block_size
            )));
        }
        Ok(())
    }

    fn quantizer(&self) -> QuantizerConfig {
        QuantizerConfig::new(self.step).expect("validated step")
    }
}

fn check_volume(volume: &ImageVolume) -> Result<()> {
    if volume.ndim() > u8::MAX as usize || volume.channels() > u8::MAX as usize {
        return Err(Error::InvalidInput(format!(
            "{} dimensions and {} channels exceed the container limits",
            volume.ndim(),
            volume.channels()
        )));
    }
    if volume.extents().iter().any(|&e| e > u32::MAX as usize) {
        return Err(Error::InvalidInput("extent exceeds u32".into()));
    }
    Ok(())
}

/// Transforms and quantizes every block of `volume`. Blocks are returned in
/// grid order (channel-major, then C order over the block grid).
pub fn quantized_blocks(volume: &ImageVolume, config: &CodecConfig) -> Result<Vec<Vec<i64>>> {
    config.validate()?;
    let grid = blocking::tile(volume, config.block_size)?;
    let nd = NdTransform::new(config.transform, config.block_size, volume.ndim())?;
    let q = config.quantizer();
    grid.blocks
        .into_par_iter()
        .map_init(
            || nd.scratch(),
            |scratch, mut block| {
                nd.forward(&mut block.data, scratch);
                Ok(quantize::quantize(&block.data, &q)?)
            },
        )
        .collect()
}

/// Compresses `volume` into an in-memory container.
pub fn compress(volume: &ImageVolume, config: &CodecConfig) -> Result<CompressedArtifact> {
    check_volume(volume)?;
    let blocks = quantized_blocks(volume, config)?;
    let per_channel = blocks.len() / volume.channels();
    let channels = blocks
        .par_chunks(per_channel)
        .map(|chunk| {
            let symbols: Vec<i64> = chunk.concat();
            let code = entropy::build_code(&SymbolHistogram::from_symbols(&symbols)?);
            let payload = entropy::encode(&symbols, &code)?;
            Ok(ChannelStream { code, payload })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompressedArtifact {
        transform: config.transform,
        extents: volume.extents().iter().map(|&e| e as u32).collect(),
        bitdepth: volume.bitdepth().bits(),
        block_size: config.block_size as u16,
        step: config.step,
        channels,
    })
}

/// Reconstructs the volume held by `artifact`. All channels are decoded
/// before any block is inverted.
pub fn decompress(artifact: &CompressedArtifact) -> Result<ImageVolume> {
    let extents: Vec<usize> = artifact.extents.iter().map(|&e| e as usize).collect();
    let block_size = artifact.block_size as usize;
    let config = CodecConfig::new(artifact.transform, block_size, artifact.step);
    config.validate()?;
    let bitdepth = BitDepth::from_bits(artifact.bitdepth)
        .ok_or_else(|| Error::InvalidInput(format!("bit depth {}", artifact.bitdepth)))?;
    if artifact.channels.is_empty() {
        return Err(Error::InvalidInput("container holds no channels".into()));
    }
    let nd = NdTransform::new(artifact.transform, block_size, extents.len())?;
    let block_len = nd.block_len();
    let count = blocking::padded_len(&extents, block_size);

    let decoded = artifact
        .channels
        .par_iter()
        .map(|ch| entropy::decode(&ch.payload, &ch.code, count))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let shape = blocking::grid_shape(&extents, block_size);
    let mut origins = Vec::with_capacity(count / block_len);
    let mut coord = vec![0usize; shape.len()];
    for _ in 0..count / block_len {
        origins.push(coord.iter().map(|c| c * block_size).collect::<Vec<_>>());
        for axis in (0..shape.len()).rev() {
            coord[axis] += 1;
            if coord[axis] < shape[axis] {
                break;
            }
            coord[axis] = 0;
        }
    }

    let q = config.quantizer();
    let jobs: Vec<(usize, usize, &[i64])> = decoded
        .iter()
        .enumerate()
        .flat_map(|(channel, symbols)| {
            symbols
                .chunks(block_len)
                .enumerate()
                .map(move |(i, chunk)| (channel, i, chunk))
        })
        .collect();
    let blocks = jobs
        .into_par_iter()
        .map_init(
            || nd.scratch(),
            |scratch, (channel, i, symbols)| {
                let mut data = quantize::dequantize(symbols, &q);
                nd.inverse(&mut data, scratch);
                Block {
                    channel,
                    origin: origins[i].clone(),
                    data,
                }
            },
        )
        .collect();
    let grid = BlockGrid {
        block_size,
        extents,
        channels: artifact.channels.len(),
        bitdepth,
        blocks,
    };
    Ok(blocking::untile(&grid)?)
}

pub fn compress_to_bytes(volume: &ImageVolume, config: &CodecConfig) -> Result<Vec<u8>> {
    Ok(container::serialize(&compress(volume, config)?))
}

pub fn decompress_bytes(bytes: &[u8]) -> Result<ImageVolume> {
    decompress(&container::parse(bytes)?)
}
