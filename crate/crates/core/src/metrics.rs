//! Figures of merit and the benchmark matrix.

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::blocking::ImageVolume;
use crate::codec::{self, CodecConfig};
use crate::container;
use crate::entropy::{self, SymbolHistogram};
use crate::error::{Error, Result};
use crate::transform::TransformKind;

/// `original / compressed`.
pub fn compression_ratio(original_bytes: u64, compressed_bytes: u64) -> Result<f64> {
    if original_bytes == 0 || compressed_bytes == 0 {
        return Err(Error::InvalidInput(format!(
            "sizes must be positive (original {original_bytes}, compressed {compressed_bytes})"
        )));
    }
    Ok(original_bytes as f64 / compressed_bytes as f64)
}

/// Mean and sample standard deviation of per-block entropy and average
/// codeword length, in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStats {
    pub blocks: usize,
    pub mean_entropy: f64,
    pub std_entropy: f64,
    pub mean_length: f64,
    pub std_length: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Entropy and Huffman average length of one block's own histogram.
pub fn block_entropy_and_length(symbols: &[i64]) -> Result<(f64, f64)> {
    let h = SymbolHistogram::from_symbols(symbols)?;
    let code = entropy::build_code(&h);
    Ok((entropy::entropy(&h), entropy::avg_code_length(&code, &h)?))
}

/// Builds a histogram and Huffman code per block and summarizes across blocks.
pub fn per_block_stats<B: AsRef<[i64]>>(blocks: &[B]) -> Result<BlockStats> {
    if blocks.is_empty() {
        return Err(Error::InvalidInput("no blocks".into()));
    }
    let (hs, ls): (Vec<f64>, Vec<f64>) = blocks
        .iter()
        .map(|b| block_entropy_and_length(b.as_ref()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let (mean_entropy, std_entropy) = mean_std(&hs);
    let (mean_length, std_length) = mean_std(&ls);
    Ok(BlockStats {
        blocks: blocks.len(),
        mean_entropy,
        std_entropy,
        mean_length,
        std_length,
    })
}

/// Per-block statistics of `volume` under `config`, without building a
/// container.
pub fn analyze(volume: &ImageVolume, config: &CodecConfig) -> Result<BlockStats> {
    per_block_stats(&codec::quantized_blocks(volume, config)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    pub max_abs_error: u32,
    pub mse: f64,
    /// `f64::INFINITY` when the images are identical.
    pub psnr_db: f64,
}

impl Distortion {
    pub fn is_lossless(&self) -> bool {
        self.max_abs_error == 0
    }
}

pub fn distortion(original: &ImageVolume, reconstructed: &ImageVolume) -> Result<Distortion> {
    if original.extents() != reconstructed.extents()
        || original.channels() != reconstructed.channels()
        || original.bitdepth() != reconstructed.bitdepth()
    {
        return Err(Error::InvalidInput(format!(
            "shape mismatch: {:?}x{} vs {:?}x{}",
            original.extents(),
            original.channels(),
            reconstructed.extents(),
            reconstructed.channels()
        )));
    }
    let mut max = 0u32;
    let mut sq = 0f64;
    for (&a, &b) in original.pixels().iter().zip(reconstructed.pixels()) {
        let d = (a as i32 - b as i32).unsigned_abs();
        max = max.max(d);
        sq += (d as f64) * (d as f64);
    }
    let mse = sq / original.pixels().len() as f64;
    let peak = original.bitdepth().max_value() as f64;
    let psnr_db = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    };
    Ok(Distortion {
        max_abs_error: max,
        mse,
        psnr_db,
    })
}

/// Median wall time in seconds of an in-memory compress + decompress round
/// trip over `repeats` runs.
pub fn time_roundtrip(volume: &ImageVolume, config: &CodecConfig, repeats: usize) -> Result<f64> {
    if repeats == 0 {
        return Err(Error::Config("at least one timing repetition is required".into()));
    }
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        let artifact = codec::compress(volume, config)?;
        let out = codec::decompress(&artifact)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(out);
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[mid]
    } else {
        (times[mid - 1] + times[mid]) / 2.0
    })
}

/// One row of the benchmark CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub image: String,
    pub transform: TransformKind,
    pub block_size: usize,
    pub step: f64,
    pub original_bytes: u64,
    pub compressed_bytes: u64,
    pub payload_bytes: u64,
    pub cr: f64,
    pub cr_payload_only: f64,
    pub mean_entropy: f64,
    pub std_entropy: f64,
    pub mean_length: f64,
    pub std_length: f64,
    pub max_error: u32,
    pub psnr_db: f64,
    pub seconds: f64,
}

/// CSV column names, in order.
pub const CSV_COLUMNS: [&str; 16] = [
    "image",
    "transform",
    "block_size",
    "step",
    "original_bytes",
    "compressed_bytes",
    "payload_bytes",
    "cr",
    "cr_payload_only",
    "mean_entropy",
    "std_entropy",
    "mean_length",
    "std_length",
    "max_error",
    "psnr_db",
    "seconds",
];

/// Compresses, decompresses, measures and times one image under one config.
pub fn run_report(
    image: &str,
    volume: &ImageVolume,
    config: &CodecConfig,
    repeats: usize,
) -> Result<RunReport> {
    let artifact = codec::compress(volume, config)?;
    let compressed_bytes = container::serialize(&artifact).len() as u64;
    let payload_bytes = artifact.payload_bytes() as u64;
    let restored = codec::decompress(&artifact)?;
    let dist = distortion(volume, &restored)?;
    let stats = analyze(volume, config)?;
    let original_bytes = volume.raw_bytes() as u64;
    let seconds = time_roundtrip(volume, config, repeats)?;
    Ok(RunReport {
        image: image.to_string(),
        transform: config.transform,
        block_size: config.block_size,
        step: config.step,
        original_bytes,
        compressed_bytes,
        payload_bytes,
        cr: compression_ratio(original_bytes, compressed_bytes)?,
        cr_payload_only: compression_ratio(original_bytes, payload_bytes.max(1))?,
        mean_entropy: stats.mean_entropy,
        std_entropy: stats.std_entropy,
        mean_length: stats.mean_length,
        std_length: stats.std_length,
        max_error: dist.max_abs_error,
        psnr_db: dist.psnr_db,
        seconds,
    })
}

/// One report per (image, transform, block size). Unsupported combinations
/// are logged and skipped. Cells run one after another so that timings do
/// not contend.
pub fn bench_matrix(
    corpus: &[(String, ImageVolume)],
    transforms: &[TransformKind],
    block_sizes: &[usize],
    step: f64,
    repeats: usize,
) -> Result<Vec<RunReport>> {
    if corpus.is_empty() {
        return Err(Error::Config("empty corpus".into()));
    }
    let mut rows = Vec::with_capacity(corpus.len() * transforms.len() * block_sizes.len());
    for (name, volume) in corpus {
        for &transform in transforms {
            for &block_size in block_sizes {
                let config = CodecConfig::new(transform, block_size, step);
                if let Err(e) = config.validate() {
                    log::warn!("skipping {name} {transform} B={block_size}: {e}");
                    continue;
                }
                log::info!("{name} {transform} B={block_size}");
                rows.push(run_report(name, volume, &config, repeats)?);
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[RunReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunReport>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if !headers.iter().eq(CSV_COLUMNS) {
        return Err(Error::InvalidInput(format!("unexpected CSV header {headers:?}")));
    }
    r.deserialize().map(|row| Ok(row?)).collect()
}
