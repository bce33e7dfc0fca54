//! `zipr`: compress, decompress, analyze and benchmark images with the
//! zipper-transform codec.
//!
//! Results go to standard output as `key=value` lines; diagnostics go to
//! standard error. Exit codes: 0 success, 1 I/O error, 2 format or integrity
//! error, 3 configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zipr_core::{
    codec, container, image_io, metrics, CodecConfig, Error, ImageError, ImageVolume,
    TransformKind, BLOCK_SIZES,
};

#[derive(Parser, Debug)]
#[command(name = "zipr", version, about = "Near-lossless zipper-transform image codec")]
struct Cli {
    /// Worker threads for block-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress a PGM/PPM/ZVOL image into a .zipr file.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Restore an image from a .zipr file.
    Decompress { input: PathBuf, output: PathBuf },
    /// Print per-block entropy and codeword length statistics.
    Analyze {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Transform::Zip)]
        transform: Transform,
        /// Block sizes to analyze (default: 4,8,16,32,64,128).
        #[arg(long = "block", value_delimiter = ',')]
        blocks: Vec<u16>,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Run the transform x block-size matrix over a corpus directory.
    Bench {
        corpus: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        /// Timing repetitions per cell; the median is reported.
        #[arg(long, default_value_t = 5)]
        repeat: u8,
        /// Transforms to run (default: all).
        #[arg(long = "transform", value_enum, value_delimiter = ',')]
        transforms: Vec<Transform>,
        /// Block sizes to run (default: 4,8,16,32,64,128).
        #[arg(long = "block", value_delimiter = ',')]
        blocks: Vec<u16>,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
}

#[derive(Args, Debug)]
struct CodecArgs {
    #[arg(long, value_enum, default_value_t = Transform::Zip)]
    transform: Transform,
    #[arg(long, default_value_t = 8)]
    block: u16,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Transform {
    Zip,
    ZipInterlace,
    Dct,
    Fwht,
}

impl From<Transform> for TransformKind {
    fn from(t: Transform) -> Self {
        match t {
            Transform::Zip => TransformKind::ZipConcat,
            Transform::ZipInterlace => TransformKind::ZipInterlace,
            Transform::Dct => TransformKind::Dct,
            Transform::Fwht => TransformKind::Fwht,
        }
    }
}

impl CodecArgs {
    fn config(&self) -> CodecConfig {
        CodecConfig::new(self.transform.into(), self.block as usize, self.step)
    }
}

const EXIT_IO: u8 = 1;
const EXIT_FORMAT: u8 = 2;
const EXIT_CONFIG: u8 = 3;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Csv(_) | Error::Image(ImageError::Io { .. }) => EXIT_IO,
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_FORMAT,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Compress {
            input,
            output,
            codec,
        } => compress(&input, &output, &codec.config()),
        Command::Decompress { input, output } => decompress(&input, &output),
        Command::Analyze {
            input,
            transform,
            blocks,
            step,
        } => analyze(&input, transform.into(), &block_list(&blocks), step),
        Command::Bench {
            corpus,
            csv,
            repeat,
            transforms,
            blocks,
            step,
        } => {
            let transforms: Vec<TransformKind> = if transforms.is_empty() {
                TransformKind::ALL.to_vec()
            } else {
                transforms.into_iter().map(Into::into).collect()
            };
            bench(&corpus, &csv, repeat as usize, &transforms, &block_list(&blocks), step)
        }
    }
}

fn block_list(blocks: &[u16]) -> Vec<usize> {
    if blocks.is_empty() {
        BLOCK_SIZES.to_vec()
    } else {
        blocks.iter().map(|&b| b as usize).collect()
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(|source| {
        ImageError::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>, Error> {
    fs::read(path).map_err(|source| {
        ImageError::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn compress(input: &Path, output: &Path, config: &CodecConfig) -> Result<(), Error> {
    config.validate()?;
    let image = image_io::load_image(input)?;
    let start = Instant::now();
    let artifact = codec::compress(&image, config)?;
    let restored = codec::decompress(&artifact)?;
    let seconds = start.elapsed().as_secs_f64();
    let bytes = container::serialize(&artifact);
    write_file(output, &bytes)?;

    let dist = metrics::distortion(&image, &restored)?;
    let original = image.raw_bytes() as u64;
    let payload = artifact.payload_bytes() as u64;
    println!("transform={}", config.transform);
    println!("block={}", config.block_size);
    println!("step={}", config.step);
    println!("original_bytes={original}");
    println!("compressed_bytes={}", bytes.len());
    println!("payload_bytes={payload}");
    println!("cr={:.6}", metrics::compression_ratio(original, bytes.len() as u64)?);
    println!("cr_payload_only={:.6}", metrics::compression_ratio(original, payload.max(1))?);
    println!("max_error={}", dist.max_abs_error);
    println!("psnr_db={:.4}", dist.psnr_db);
    println!("seconds={seconds:.6}");
    Ok(())
}

fn decompress(input: &Path, output: &Path) -> Result<(), Error> {
    let bytes = read_file(input)?;
    let image = codec::decompress_bytes(&bytes)?;
    image_io::save_image(&image, output)?;
    let extents: Vec<String> = image.extents().iter().map(ToString::to_string).collect();
    println!("extents={}", extents.join("x"));
    println!("channels={}", image.channels());
    println!("bitdepth={}", image.bitdepth().bits());
    Ok(())
}

fn analyze(input: &Path, transform: TransformKind, blocks: &[usize], step: f64) -> Result<(), Error> {
    let configs: Vec<CodecConfig> = blocks
        .iter()
        .map(|&b| CodecConfig::new(transform, b, step))
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let image = image_io::load_image(input)?;
    println!("transform={transform}");
    for config in &configs {
        let s = metrics::analyze(&image, config)?;
        println!(
            "block={} blocks={} mean_entropy={:.6} std_entropy={:.6} mean_length={:.6} std_length={:.6}",
            config.block_size, s.blocks, s.mean_entropy, s.std_entropy, s.mean_length, s.std_length
        );
    }
    Ok(())
}

fn load_corpus(dir: &Path) -> Result<Vec<(String, ImageVolume)>, Error> {
    let entries = fs::read_dir(dir).map_err(|source| ImageError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut corpus = Vec::new();
    for path in paths {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if !matches!(ext.as_deref(), Some("pgm" | "ppm" | "pnm" | "zvol")) {
            log::warn!("skipping {name}: not a PNM or ZVOL file");
            continue;
        }
        match image_io::load_image(&path) {
            Ok(v) => {
                log::info!("loaded {name}");
                corpus.push((name, v));
            }
            Err(e) => log::warn!("skipping {name}: {e}"),
        }
    }
    Ok(corpus)
}

fn bench(
    dir: &Path,
    csv: &Path,
    repeat: usize,
    transforms: &[TransformKind],
    blocks: &[usize],
    step: f64,
) -> Result<(), Error> {
    if repeat == 0 {
        return Err(Error::Config("--repeat must be at least 1".into()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Config(format!("quantizer step {step} must be positive")));
    }
    if blocks.iter().any(|&b| b < 2) {
        return Err(Error::Config("block sizes must be at least 2".into()));
    }
    let corpus = load_corpus(dir)?;
    if corpus.is_empty() {
        return Err(Error::Config(format!("no PNM or ZVOL images in {}", dir.display())));
    }
    let rows = metrics::bench_matrix(&corpus, transforms, blocks, step, repeat)?;
    let file = fs::File::create(csv).map_err(|source| ImageError::Io {
        path: csv.to_path_buf(),
        source,
    })?;
    metrics::write_csv(&rows, std::io::BufWriter::new(file))?;
    for row in &rows {
        eprintln!(
            "{} {} B={} cr={:.4} max_error={} seconds={:.4}",
            row.image, row.transform, row.block_size, row.cr, row.max_error, row.seconds
        );
    }
    println!("images={}", corpus.len());
    println!("rows={}", rows.len());
    println!("csv={}", csv.display());
    Ok(())
}
