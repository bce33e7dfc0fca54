//! Block tiling of N-dimensional images and separable N-D transforms.
//!
//! Volumes are stored in C order: `extents[0]` is the slowest-varying axis
//! and channels are interleaved innermost. For a 2-D image the extents are
//! `[height, width]`, so axis 0 runs down the columns. Blocks are cubes of
//! side `B` stored in the same C order.

use crate::error::{ContainerError, TransformError};
use crate::transform::{Kernel, Scratch, TransformKind};

/// Sample precision of an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn bits(self) -> u8 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        match bits {
            8 => Some(BitDepth::Eight),
            16 => Some(BitDepth::Sixteen),
            _ => None,
        }
    }

    pub fn max_value(self) -> u16 {
        match self {
            BitDepth::Eight => u8::MAX as u16,
            BitDepth::Sixteen => u16::MAX,
        }
    }

    /// Bytes per sample in raw storage.
    pub fn bytes(self) -> usize {
        self.bits() as usize / 8
    }
}

/// A dense N-dimensional image with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageVolume {
    extents: Vec<usize>,
    channels: usize,
    bitdepth: BitDepth,
    pixels: Vec<u16>,
}

impl ImageVolume {
    pub fn new(
        extents: Vec<usize>,
        channels: usize,
        bitdepth: BitDepth,
        pixels: Vec<u16>,
    ) -> Result<Self, TransformError> {
        if extents.is_empty() || extents.contains(&0) {
            return Err(TransformError::InvalidInput(format!(
                "extents {extents:?} must be non-empty and positive"
            )));
        }
        if channels == 0 {
            return Err(TransformError::InvalidInput("zero channels".into()));
        }
        let expected = extents
            .iter()
            .try_fold(channels, |acc, &e| acc.checked_mul(e))
            .ok_or_else(|| TransformError::InvalidInput("volume too large".into()))?;
        if pixels.len() != expected {
            return Err(TransformError::InvalidInput(format!(
                "expected {expected} samples, got {}",
                pixels.len()
            )));
        }
        let max = bitdepth.max_value();
        if let Some(p) = pixels.iter().find(|&&p| p > max) {
            return Err(TransformError::InvalidInput(format!(
                "sample {p} exceeds {}-bit range",
                bitdepth.bits()
            )));
        }
        Ok(ImageVolume {
            extents,
            channels,
            bitdepth,
            pixels,
        })
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn ndim(&self) -> usize {
        self.extents.len()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn bitdepth(&self) -> BitDepth {
        self.bitdepth
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    /// Number of spatial positions (pixels or voxels), ignoring channels.
    pub fn positions(&self) -> usize {
        self.extents.iter().product()
    }

    /// Size of the raw samples in bytes.
    pub fn raw_bytes(&self) -> usize {
        self.pixels.len() * self.bitdepth.bytes()
    }

    pub fn into_pixels(self) -> Vec<u16> {
        self.pixels
    }
}

/// One cubic block of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub channel: usize,
    /// Index of the first sample along each axis of the padded volume.
    pub origin: Vec<usize>,
    /// `B^d` values in C order.
    pub data: Vec<f64>,
}

/// A volume cut into cubic blocks, padded by edge replication.
///
/// Blocks are ordered channel-major, then by grid position in C order.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    pub block_size: usize,
    pub extents: Vec<usize>,
    pub channels: usize,
    pub bitdepth: BitDepth,
    pub blocks: Vec<Block>,
}

impl BlockGrid {
    /// Blocks per axis.
    pub fn grid_shape(&self) -> Vec<usize> {
        grid_shape(&self.extents, self.block_size)
    }

    pub fn padded_extents(&self) -> Vec<usize> {
        self.grid_shape()
            .iter()
            .map(|g| g * self.block_size)
            .collect()
    }

    pub fn blocks_per_channel(&self) -> usize {
        self.grid_shape().iter().product()
    }

    pub fn block_len(&self) -> usize {
        self.block_size.pow(self.extents.len() as u32)
    }
}

pub fn grid_shape(extents: &[usize], block_size: usize) -> Vec<usize> {
    extents.iter().map(|e| e.div_ceil(block_size)).collect()
}

/// Total number of coefficients per channel after padding.
pub fn padded_len(extents: &[usize], block_size: usize) -> usize {
    grid_shape(extents, block_size)
        .iter()
        .map(|g| g * block_size)
        .product()
}

fn strides(extents: &[usize], inner: usize) -> Vec<usize> {
    let mut strides = vec![0; extents.len()];
    let mut acc = inner;
    for (s, &e) in strides.iter_mut().zip(extents).rev() {
        *s = acc;
        acc *= e;
    }
    strides
}

/// Calls `f(flat_offset_in_block, coords)` for every position of a cube of
/// side `side` in `d` dimensions, in C order.
fn for_each_coord(d: usize, side: usize, mut f: impl FnMut(usize, &[usize])) {
    let mut coord = vec![0usize; d];
    let total = side.pow(d as u32);
    for flat in 0..total {
        f(flat, &coord);
        for axis in (0..d).rev() {
            coord[axis] += 1;
            if coord[axis] < side {
                break;
            }
            coord[axis] = 0;
        }
    }
}

/// Cuts `volume` into `B^d` blocks, padding every axis up to a multiple of `B`
/// by replicating the last sample.
pub fn tile(volume: &ImageVolume, block_size: usize) -> Result<BlockGrid, TransformError> {
    if block_size < 2 {
        return Err(TransformError::InvalidInput(format!(
            "block size {block_size} must be at least 2"
        )));
    }
    let d = volume.ndim();
    let extents = volume.extents().to_vec();
    let channels = volume.channels();
    let src_strides = strides(&extents, channels);
    let shape = grid_shape(&extents, block_size);
    let block_len = block_size.pow(d as u32);
    let pixels = volume.pixels();

    let mut blocks = Vec::with_capacity(channels * shape.iter().product::<usize>());
    for channel in 0..channels {
        for_each_coord_in(&shape, |grid_pos| {
            let origin: Vec<usize> = grid_pos.iter().map(|g| g * block_size).collect();
            let mut data = vec![0.0; block_len];
            for_each_coord(d, block_size, |flat, local| {
                let offset: usize = (0..d)
                    .map(|a| (origin[a] + local[a]).min(extents[a] - 1) * src_strides[a])
                    .sum();
                data[flat] = pixels[offset + channel] as f64;
            });
            blocks.push(Block {
                channel,
                origin,
                data,
            });
        });
    }
    Ok(BlockGrid {
        block_size,
        extents,
        channels,
        bitdepth: volume.bitdepth(),
        blocks,
    })
}

fn for_each_coord_in(shape: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = shape.iter().product();
    let mut coord = vec![0usize; shape.len()];
    for _ in 0..total {
        f(&coord);
        for axis in (0..shape.len()).rev() {
            coord[axis] += 1;
            if coord[axis] < shape[axis] {
                break;
            }
            coord[axis] = 0;
        }
    }
}

/// Reassembles a volume from its blocks, cropping the padding. Block values
/// are rounded to the nearest integer and clamped to the sample range.
pub fn untile(grid: &BlockGrid) -> Result<ImageVolume, ContainerError> {
    let d = grid.extents.len();
    let corrupt = |msg: String| ContainerError::CorruptGrid(msg);
    if d == 0 || grid.extents.contains(&0) || grid.channels == 0 || grid.block_size < 2 {
        return Err(corrupt(format!(
            "extents {:?}, {} channels, block size {}",
            grid.extents, grid.channels, grid.block_size
        )));
    }
    let shape = grid.grid_shape();
    let per_channel: usize = shape.iter().product();
    if grid.blocks.len() != per_channel * grid.channels {
        return Err(corrupt(format!(
            "expected {} blocks, found {}",
            per_channel * grid.channels,
            grid.blocks.len()
        )));
    }
    let block_len = grid.block_len();
    let extents = &grid.extents;
    let dst_strides = strides(extents, grid.channels);
    let max = grid.bitdepth.max_value() as f64;
    let mut pixels = vec![0u16; extents.iter().product::<usize>() * grid.channels];

    for block in &grid.blocks {
        if block.channel >= grid.channels
            || block.origin.len() != d
            || block.data.len() != block_len
            || block
                .origin
                .iter()
                .zip(&shape)
                .any(|(&o, &g)| o % grid.block_size != 0 || o / grid.block_size >= g)
        {
            return Err(corrupt(format!(
                "block at {:?} (channel {}) does not fit the grid",
                block.origin, block.channel
            )));
        }
        for_each_coord(d, grid.block_size, |flat, local| {
            let mut offset = block.channel;
            for a in 0..d {
                let pos = block.origin[a] + local[a];
                if pos >= extents[a] {
                    return;
                }
                offset += pos * dst_strides[a];
            }
            pixels[offset] = block.data[flat].round().clamp(0.0, max) as u16;
        });
    }
    ImageVolume::new(extents.clone(), grid.channels, grid.bitdepth, pixels)
        .map_err(|e| corrupt(e.to_string()))
}

/// A separable transform over cubic blocks of fixed side and dimension.
#[derive(Debug, Clone)]
pub struct NdTransform {
    kernel: Kernel,
    ndim: usize,
}

impl NdTransform {
    pub fn new(kind: TransformKind, block_size: usize, ndim: usize) -> Result<Self, TransformError> {
        if ndim == 0 {
            return Err(TransformError::InvalidInput("zero dimensions".into()));
        }
        if kind == TransformKind::Fwht && !block_size.is_power_of_two() {
            return Err(TransformError::UnsupportedCombination(format!(
                "fwht needs a power-of-two block size, got {block_size}"
            )));
        }
        Ok(NdTransform {
            kernel: Kernel::new(kind, block_size)?,
            ndim,
        })
    }

    pub fn kind(&self) -> TransformKind {
        self.kernel.kind()
    }

    pub fn block_size(&self) -> usize {
        self.kernel.len()
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn block_len(&self) -> usize {
        self.kernel.len().pow(self.ndim as u32)
    }

    pub fn scratch(&self) -> NdScratch {
        NdScratch {
            fiber: vec![0.0; self.kernel.len()],
            kernel: self.kernel.scratch(),
        }
    }

    /// Applies the 1-D transform along axis 0, then 1, up to `d - 1`.
    pub fn forward(&self, block: &mut [f64], scratch: &mut NdScratch) {
        for axis in 0..self.ndim {
            self.along_axis(block, axis, scratch, true);
        }
    }

    /// Applies the 1-D inverse along the axes in reverse order.
    pub fn inverse(&self, block: &mut [f64], scratch: &mut NdScratch) {
        for axis in (0..self.ndim).rev() {
            self.along_axis(block, axis, scratch, false);
        }
    }

    fn along_axis(&self, block: &mut [f64], axis: usize, scratch: &mut NdScratch, forward: bool) {
        let side = self.kernel.len();
        assert_eq!(block.len(), self.block_len(), "block size mismatch");
        let stride = side.pow((self.ndim - 1 - axis) as u32);
        let outer = block.len() / (side * stride);
        let NdScratch { fiber, kernel } = scratch;
        for o in 0..outer {
            for i in 0..stride {
                let base = o * side * stride + i;
                if stride == 1 {
                    let slice = &mut block[base..base + side];
                    if forward {
                        self.kernel.forward(slice, kernel);
                    } else {
                        self.kernel.inverse(slice, kernel);
                    }
                    continue;
                }
                for (j, v) in fiber.iter_mut().enumerate() {
                    *v = block[base + j * stride];
                }
                if forward {
                    self.kernel.forward(fiber, kernel);
                } else {
                    self.kernel.inverse(fiber, kernel);
                }
                for (j, v) in fiber.iter().enumerate() {
                    block[base + j * stride] = *v;
                }
            }
        }
    }
}

/// Per-thread buffers for [`NdTransform`].
#[derive(Debug)]
pub struct NdScratch {
    fiber: Vec<f64>,
    kernel: Scratch,
}

fn side_of(len: usize, ndim: usize) -> Result<usize, TransformError> {
    if ndim == 0 || len == 0 {
        return Err(TransformError::InvalidInput("empty block".into()));
    }
    let side = (len as f64).powf(1.0 / ndim as f64).round() as usize;
    if side.checked_pow(ndim as u32) != Some(len) {
        return Err(TransformError::InvalidInput(format!(
            "{len} values do not form a cube in {ndim} dimensions"
        )));
    }
    Ok(side)
}

/// Separable forward transform of a cubic block of `ndim` dimensions.
pub fn forward_nd(block: &[f64], ndim: usize, kind: TransformKind) -> Result<Vec<f64>, TransformError> {
    let side = side_of(block.len(), ndim)?;
    let t = NdTransform::new(kind, side, ndim)?;
    let mut out = block.to_vec();
    t.forward(&mut out, &mut t.scratch());
    Ok(out)
}

/// Separable inverse transform, axes in reverse order.
pub fn inverse_nd(coeffs: &[f64], ndim: usize, kind: TransformKind) -> Result<Vec<f64>, TransformError> {
    let side = side_of(coeffs.len(), ndim)?;
    let t = NdTransform::new(kind, side, ndim)?;
    let mut out = coeffs.to_vec();
    t.inverse(&mut out, &mut t.scratch());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn volume(extents: Vec<usize>, channels: usize) -> ImageVolume {
        let n = extents.iter().product::<usize>() * channels;
        let pixels = (0..n).map(|i| (i * 37 % 256) as u16).collect();
        ImageVolume::new(extents, channels, BitDepth::Eight, pixels).unwrap()
    }

    #[test]
    fn exact_division_has_no_padding() {
        let grid = tile(&volume(vec![512, 512], 1), 64).unwrap();
        assert_eq!(grid.grid_shape(), vec![8, 8]);
        assert_eq!(grid.blocks.len(), 64);
        assert_eq!(grid.padded_extents(), vec![512, 512]);
    }

    #[test]
    fn ragged_image_is_edge_replicated() {
        let v = volume(vec![5, 5], 1);
        let grid = tile(&v, 4).unwrap();
        assert_eq!(grid.grid_shape(), vec![2, 2]);
        assert_eq!(grid.padded_extents(), vec![8, 8]);
        // bottom-right block: only (0,0) is real, the rest replicate pixel (4,4)
        let last = &grid.blocks[3];
        assert_eq!(last.origin, vec![4, 4]);
        let corner = v.pixels()[24] as f64;
        assert!(last.data.iter().all(|&x| x == corner));
        // right-edge block replicates column 4 along each row
        let right = &grid.blocks[1];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(right.data[r * 4 + c], v.pixels()[r * 5 + 4] as f64);
            }
        }
        assert_eq!(untile(&grid).unwrap(), v);
    }

    #[test]
    fn three_d_grid() {
        let grid = tile(&volume(vec![16, 256, 256], 1), 16).unwrap();
        assert_eq!(grid.grid_shape(), vec![1, 16, 16]);
        assert_eq!(grid.blocks[0].data.len(), 16 * 16 * 16);
    }

    #[test]
    fn multichannel_roundtrip() {
        let v = volume(vec![7, 9], 3);
        let grid = tile(&v, 4).unwrap();
        assert_eq!(grid.blocks.len(), 3 * 2 * 3);
        assert_eq!(untile(&grid).unwrap(), v);
    }

    #[test]
    fn block_size_one_rejected() {
        assert!(tile(&volume(vec![4, 4], 1), 1).is_err());
    }

    #[test]
    fn corrupted_grid_rejected() {
        let mut grid = tile(&volume(vec![8, 8], 1), 4).unwrap();
        grid.blocks.pop();
        assert!(matches!(untile(&grid), Err(ContainerError::CorruptGrid(_))));
        let mut grid = tile(&volume(vec![8, 8], 1), 4).unwrap();
        grid.blocks[1].data.truncate(3);
        assert!(untile(&grid).is_err());
    }

    #[test]
    fn fwht_requires_power_of_two() {
        assert!(matches!(
            NdTransform::new(TransformKind::Fwht, 6, 2),
            Err(TransformError::UnsupportedCombination(_))
        ));
        assert!(NdTransform::new(TransformKind::Dct, 6, 2).is_ok());
    }

    #[test]
    fn constant_block_has_single_dc() {
        let b = 8;
        let block = vec![3.0; b * b];
        for kind in TransformKind::ALL {
            let c = forward_nd(&block, 2, kind).unwrap();
            assert!((c[0] - 3.0 * (b * b) as f64).abs() < 1e-9);
            assert!(c[1..].iter().all(|v| v.abs() < 1e-9), "{kind}");
        }
    }

    #[test]
    fn non_cubic_block_rejected() {
        assert!(forward_nd(&[0.0; 12], 2, TransformKind::Dct).is_err());
    }
}
