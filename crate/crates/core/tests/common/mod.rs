//! Direct-summation reference transforms, independent of the FFT kernels.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-255.0..255.0)).collect()
}

/// `F(k) = sum f(n) exp(-2 pi i k n / N)`.
pub fn dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * ((k * t) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// `f(n) = (1/N) sum F(k) exp(2 pi i k n / N)`, complex result.
pub fn idft(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    (0..n)
        .map(|t| {
            f.iter()
                .enumerate()
                .map(|(k, &v)| v * Complex64::from_polar(1.0, 2.0 * PI * ((k * t) % n) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

pub fn dct2(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, &v)| v * (PI * (2 * t + 1) as f64 * k as f64 / (2 * n) as f64).cos())
                .sum()
        })
        .collect()
}

/// `x(n) = (X(0) + 2 sum_{k>0} X(k) cos(pi (2n+1) k / 2N)) / N`.
pub fn dct3(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|t| {
            let s: f64 = c
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let w = if k == 0 { 1.0 } else { 2.0 };
                    w * v * (PI * (2 * t + 1) as f64 * k as f64 / (2 * n) as f64).cos()
                })
                .sum();
            s / n as f64
        })
        .collect()
}

/// Sylvester Hadamard matrix entry: `(-1)^popcount(i & j)`.
pub fn hadamard(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| if (i & j).count_ones() % 2 == 0 { v } else { -v })
                .sum()
        })
        .collect()
}

pub fn ihadamard(c: &[f64]) -> Vec<f64> {
    hadamard(c).into_iter().map(|v| v / c.len() as f64).collect()
}

/// Packs the oracle spectrum bin by bin, written from the layout description.
pub fn zipper_pack(x: &[f64], interlace: bool) -> Vec<f64> {
    let n = x.len();
    let f = dft(x);
    let m = (n - 1) / 2;
    let mut out = vec![f[0].re];
    if interlace {
        for k in 1..=m {
            out.push(f[k].re);
            out.push(f[k].im);
        }
        if n.is_multiple_of(2) {
            out.push(f[n / 2].re);
        }
    } else {
        for k in 1..=m {
            out.push(f[k].re);
        }
        if n.is_multiple_of(2) {
            out.push(f[n / 2].re);
        }
        for k in 1..=m {
            out.push(f[k].im);
        }
    }
    out
}

/// Inverse of [`zipper_pack`]: rebuild the full spectrum by conjugate
/// symmetry and apply the direct inverse DFT.
pub fn zipper_unpack(p: &[f64], interlace: bool) -> Vec<f64> {
    let n = p.len();
    let m = (n - 1) / 2;
    let mut f = vec![Complex64::default(); n];
    f[0] = Complex64::new(p[0], 0.0);
    for k in 1..=m {
        f[k] = if interlace {
            Complex64::new(p[2 * k - 1], p[2 * k])
        } else {
            let im0 = if n.is_multiple_of(2) { m + 2 } else { m + 1 };
            Complex64::new(p[k], p[im0 + k - 1])
        };
        f[n - k] = f[k].conj();
    }
    if n.is_multiple_of(2) && n >= 2 {
        let re = if interlace { p[n - 1] } else { p[m + 1] };
        f[n / 2] = Complex64::new(re, 0.0);
    }
    idft(&f).into_iter().map(|c| c.re).collect()
}

/// Max relative error, scaled by the largest reference magnitude.
pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

pub fn rel_err_c(got: &[Complex64], want: &[Complex64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.norm()));
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Applies a 1-D reference transform along every axis of a cube, axis 0
/// first.
pub fn separable(block: &[f64], side: usize, ndim: usize, f: &dyn Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let mut out = block.to_vec();
    for axis in 0..ndim {
        let stride = side.pow((ndim - 1 - axis) as u32);
        let outer = out.len() / (side * stride);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * side * stride + i;
                let fiber: Vec<f64> = (0..side).map(|j| out[base + j * stride]).collect();
                for (j, v) in f(&fiber).into_iter().enumerate() {
                    out[base + j * stride] = v;
                }
            }
        }
    }
    out
}

/// Infinity-norm of the 1-D inverse operator (largest absolute row sum),
/// built by feeding unit vectors through the reference inverse.
pub fn inverse_row_sum(side: usize, inverse: &dyn Fn(&[f64]) -> Vec<f64>) -> f64 {
    let mut rows = vec![0.0; side];
    for j in 0..side {
        let mut e = vec![0.0; side];
        e[j] = 1.0;
        for (r, v) in rows.iter_mut().zip(inverse(&e)) {
            *r += v.abs();
        }
    }
    rows.into_iter().fold(0.0, f64::max)
}

/// A boxed 1-D reference transform.
pub type RefFn = Box<dyn Fn(&[f64]) -> Vec<f64>>;
