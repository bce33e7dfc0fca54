use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use zipr_core::{Kernel, NdTransform, TransformKind};

fn kernels_1d(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_1d");
    for len in [8usize, 64, 128] {
        let input: Vec<f64> = (0..len).map(|i| (i * 7 % 256) as f64).collect();
        for kind in TransformKind::ALL {
            let kernel = Kernel::new(kind, len).unwrap();
            let mut scratch = kernel.scratch();
            group.bench_with_input(BenchmarkId::new(kind.name(), len), &input, |b, input| {
                let mut buf = input.clone();
                b.iter(|| {
                    buf.copy_from_slice(input);
                    kernel.forward(&mut buf, &mut scratch);
                    black_box(&buf);
                })
            });
        }
    }
    group.finish();
}

fn blocks_2d(c: &mut Criterion) {
    let mut group = c.benchmark_group("block_2d_roundtrip");
    for side in [8usize, 32] {
        let block: Vec<f64> = (0..side * side).map(|i| (i * 13 % 256) as f64).collect();
        for kind in TransformKind::ALL {
            let nd = NdTransform::new(kind, side, 2).unwrap();
            let mut scratch = nd.scratch();
            group.bench_with_input(BenchmarkId::new(kind.name(), side), &block, |b, block| {
                let mut buf = block.clone();
                b.iter(|| {
                    buf.copy_from_slice(block);
                    nd.forward(&mut buf, &mut scratch);
                    nd.inverse(&mut buf, &mut scratch);
                    black_box(&buf);
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, kernels_1d, blocks_2d);
criterion_main!(benches);
