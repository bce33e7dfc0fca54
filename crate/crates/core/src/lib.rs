//! Near-lossless block transform codec built on the zipper transform.
//!
//! The zipper transform packs the independent half of a real signal's DFT
//! into a real vector of the same length. Images are cut into cubic blocks,
//! transformed separably along every axis, uniformly quantized and coded
//! with one canonical Huffman table per channel. DCT and Walsh-Hadamard
//! transforms are available as baselines.
//!
//! ```
//! use zipr_core::{codec, BitDepth, CodecConfig, ImageVolume};
//!
//! let pixels: Vec<u16> = (0..64 * 64).map(|i| (i % 251) as u16).collect();
//! let image = ImageVolume::new(vec![64, 64], 1, BitDepth::Eight, pixels).unwrap();
//! let bytes = codec::compress_to_bytes(&image, &CodecConfig::default()).unwrap();
//! let restored = codec::decompress_bytes(&bytes).unwrap();
//! assert_eq!(restored.extents(), image.extents());
//! ```

pub mod blocking;
pub mod codec;
pub mod container;
pub mod entropy;
pub mod error;
pub mod image_io;
pub mod metrics;
pub mod quantize;
pub mod transform;

pub use blocking::{BitDepth, BlockGrid, ImageVolume, NdTransform};
pub use codec::{CodecConfig, BLOCK_SIZES};
pub use container::CompressedArtifact;
pub use entropy::{BitPayload, HuffmanCode, SymbolHistogram};
pub use error::{CodingError, ContainerError, Error, ImageError, Result, TransformError};
pub use metrics::{BlockStats, Distortion, RunReport};
pub use quantize::QuantizerConfig;
pub use transform::{Kernel, Layout, PackedSpectrum, TransformKind};
