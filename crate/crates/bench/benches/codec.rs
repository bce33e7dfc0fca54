use std::path::Path;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use zipr_core::entropy::{self, SymbolHistogram};
use zipr_core::{codec, image_io, CodecConfig, TransformKind};

fn roundtrip(c: &mut Criterion) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/testdata/camera.pgm");
    let image = image_io::load_image(path).unwrap();
    let mut group = c.benchmark_group("camera_roundtrip");
    group.sample_size(10);
    for kind in TransformKind::ALL {
        for block in [8usize, 64] {
            let config = CodecConfig::new(kind, block, 1.0);
            group.bench_function(BenchmarkId::new(kind.name(), block), |b| {
                b.iter(|| {
                    let artifact = codec::compress(&image, &config).unwrap();
                    black_box(codec::decompress(&artifact).unwrap());
                })
            });
        }
    }
    group.finish();
}

fn huffman(c: &mut Criterion) {
    let symbols: Vec<i64> = (0..1usize << 18)
        .map(|i| ((i.wrapping_mul(2654435761) >> 7) % 97) as i64 - 48)
        .collect();
    let code = entropy::build_code(&SymbolHistogram::from_symbols(&symbols).unwrap());
    let payload = entropy::encode(&symbols, &code).unwrap();
    c.bench_function("huffman_encode_256k", |b| {
        b.iter(|| black_box(entropy::encode(&symbols, &code).unwrap()))
    });
    c.bench_function("huffman_decode_256k", |b| {
        b.iter(|| black_box(entropy::decode(&payload, &code, symbols.len()).unwrap()))
    });
}

criterion_group!(benches, roundtrip, huffman);
criterion_main!(benches);
