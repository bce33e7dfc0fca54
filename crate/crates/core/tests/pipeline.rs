//! End-to-end codec behavior and the quantization error bound.

mod common;

use rand::Rng;
use zipr_core::blocking::{forward_nd, inverse_nd};
use zipr_core::quantize::{dequantize, quantize, QuantizerConfig};
use zipr_core::{codec, image_io, metrics, BitDepth, CodecConfig, ImageVolume, TransformKind};

fn reference_inverse(kind: TransformKind) -> common::RefFn {
    match kind {
        TransformKind::ZipConcat => Box::new(|x| common::zipper_unpack(x, false)),
        TransformKind::ZipInterlace => Box::new(|x| common::zipper_unpack(x, true)),
        TransformKind::Dct => Box::new(common::dct3),
        TransformKind::Fwht => Box::new(common::ihadamard),
    }
}

/// Worst-case pre-rounding pixel error for a 2-D block at step 1: half a
/// step times the infinity norm of the separable inverse.
fn error_bound_2d(kind: TransformKind, side: usize) -> f64 {
    let rho = common::inverse_row_sum(side, &*reference_inverse(kind));
    0.5 * rho * rho
}

#[test]
fn derived_bound_stays_below_rounding_threshold() {
    for kind in TransformKind::ALL {
        for side in zipr_core::BLOCK_SIZES {
            let bound = error_bound_2d(kind, side);
            // Below 2.5, rounding to integers can add at most 2 gray levels of error.
            assert!(bound < 2.5, "{kind} B={side}: {bound}");
            if kind == TransformKind::ZipConcat || kind == TransformKind::ZipInterlace {
                assert!(bound <= 1.0 + 1e-9, "{kind} B={side}: {bound}");
            }
        }
    }
}

#[test]
fn random_blocks_respect_derived_bound() {
    let mut rng = common::rng(30);
    let q = QuantizerConfig::default();
    for kind in TransformKind::ALL {
        let bound = error_bound_2d(kind, 8);
        let mut worst = 0.0f64;
        for _ in 0..2000 {
            let block: Vec<f64> = (0..64).map(|_| rng.gen_range(0..256) as f64).collect();
            let c = forward_nd(&block, 2, kind).unwrap();
            let r = inverse_nd(&dequantize(&quantize(&c, &q).unwrap(), &q), 2, kind).unwrap();
            for (a, b) in block.iter().zip(&r) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst <= bound + 1e-9, "{kind}: {worst} > {bound}");
    }
}

#[test]
fn quantize_properties() {
    let mut rng = common::rng(31);
    for step in [0.5, 1.0, 3.0] {
        let q = QuantizerConfig::new(step).unwrap();
        let coeffs: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-1e4..1e4)).collect();
        let s = quantize(&coeffs, &q).unwrap();
        let back = dequantize(&s, &q);
        for (c, b) in coeffs.iter().zip(&back) {
            assert!((c - b).abs() <= step / 2.0 + 1e-9);
        }
        assert_eq!(quantize(&back, &q).unwrap(), s);
    }
}

fn testdata(name: &str) -> ImageVolume {
    image_io::load_image(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata").join(name)).unwrap()
}

#[test]
fn color_and_volume_roundtrip() {
    let astro = testdata("astronaut_crop.ppm");
    let mut rng = common::rng(32);
    let vol = ImageVolume::new(
        vec![5, 12, 9],
        1,
        BitDepth::Sixteen,
        (0..5 * 12 * 9).map(|_| rng.gen_range(0..=u16::MAX)).collect(),
    )
    .unwrap();
    for kind in TransformKind::ALL {
        let cfg = CodecConfig::new(kind, 4, 1.0);
        let out = codec::decompress_bytes(&codec::compress_to_bytes(&astro, &cfg).unwrap()).unwrap();
        assert!(metrics::distortion(&astro, &out).unwrap().max_abs_error <= 2, "{kind}");
        let out = codec::decompress_bytes(&codec::compress_to_bytes(&vol, &cfg).unwrap()).unwrap();
        // 3-D: three inverse passes, bound 0.5 * rho^3
        let d = metrics::distortion(&vol, &out).unwrap();
        assert!(d.max_abs_error <= 3, "{kind}: {}", d.max_abs_error);
    }
}

#[test]
fn coarser_step_compresses_more() {
    let img = testdata("camera.pgm");
    let fine = codec::compress_to_bytes(&img, &CodecConfig::new(TransformKind::ZipConcat, 8, 1.0)).unwrap();
    let coarse = codec::compress_to_bytes(&img, &CodecConfig::new(TransformKind::ZipConcat, 8, 16.0)).unwrap();
    assert!(coarse.len() < fine.len());
}

#[test]
fn bench_matrix_and_csv() {
    let small = ImageVolume::new(vec![16, 16], 1, BitDepth::Eight, (0..256).map(|i| (i * 7 % 256) as u16).collect()).unwrap();
    let corpus = vec![("small".to_string(), small)];
    let rows = metrics::bench_matrix(&corpus, &TransformKind::ALL, &zipr_core::BLOCK_SIZES, 1.0, 1).unwrap();
    assert_eq!(rows.len(), 24);
    let mut csv = Vec::new();
    metrics::write_csv(&rows, &mut csv).unwrap();
    let header = std::str::from_utf8(&csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, metrics::CSV_COLUMNS.join(","));
    assert_eq!(metrics::read_csv(csv.as_slice()).unwrap(), rows);
    for r in &rows {
        assert!(r.cr > 0.0 && r.seconds > 0.0);
        assert!(r.mean_entropy <= r.mean_length + 1e-12);
    }
    assert!(metrics::bench_matrix(&[], &TransformKind::ALL, &[8], 1.0, 1).is_err());
    // DCT at B=6 runs, FWHT is skipped.
    let rows = metrics::bench_matrix(&corpus, &[TransformKind::Dct, TransformKind::Fwht], &[6], 1.0, 1).unwrap();
    assert_eq!(rows.len(), 1);
}
