//! One-dimensional transform kernels.
//!
//! The zipper transform takes the DFT of a real signal and keeps only the
//! independent half of its conjugate-symmetric spectrum. The real parts of
//! bins `0..=N/2` and the imaginary parts of bins `1..(N-1)/2` add up to
//! exactly `N` real numbers, so the packed vector has the same length as the
//! input. Two layouts are supported:
//!
//! * [`Layout::Concatenating`]: `[Re F0, Re F1, .., Re F(N/2), Im F1, .., Im F(N/2-1)]`
//! * [`Layout::Interlacing`]: `[Re F0, Re F1, Im F1, Re F2, Im F2, .., Re F(N/2)]`
//!
//! For odd `N` there is no Nyquist bin and bins `1..=(N-1)/2` carry both parts.
//!
//! DCT-II/DCT-III and the Walsh-Hadamard transform are provided as baselines.
//! All forward transforms are unnormalized; every inverse carries the `1/N`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::TransformError;

/// Tolerance factor for the imaginary residue accepted by [`dft_inverse`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Arrangement of real and imaginary parts in a packed spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    Concatenating,
    Interlacing,
}

/// The block transforms understood by the codec. The discriminant is the
/// transform id stored in the container header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    /// Zipper transform, concatenating layout.
    #[serde(rename = "zip")]
    ZipConcat = 0,
    /// Zipper transform, interlacing layout.
    #[serde(rename = "zip-interlace")]
    ZipInterlace = 1,
    Dct = 2,
    Fwht = 3,
}

impl TransformKind {
    pub const ALL: [TransformKind; 4] = [
        TransformKind::ZipConcat,
        TransformKind::ZipInterlace,
        TransformKind::Dct,
        TransformKind::Fwht,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    /// Command-line spelling.
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::ZipConcat => "zip",
            TransformKind::ZipInterlace => "zip-interlace",
            TransformKind::Dct => "dct",
            TransformKind::Fwht => "fwht",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn layout(self) -> Option<Layout> {
        match self {
            TransformKind::ZipConcat => Some(Layout::Concatenating),
            TransformKind::ZipInterlace => Some(Layout::Interlacing),
            _ => None,
        }
    }

    /// Whether this transform can run on fibers of length `len`.
    pub fn supports_len(self, len: usize) -> bool {
        len >= 1 && (self != TransformKind::Fwht || len.is_power_of_two())
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Zipper-packed spectrum of a real signal. `values.len()` always equals the
/// length of the signal it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSpectrum {
    pub values: Vec<f64>,
    pub layout: Layout,
}

impl PackedSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_signal(signal: &[f64]) -> Result<(), TransformError> {
    if signal.is_empty() {
        return Err(TransformError::InvalidInput("empty signal".into()));
    }
    if let Some(i) = signal.iter().position(|v| !v.is_finite()) {
        return Err(TransformError::InvalidInput(format!(
            "sample {i} is not finite"
        )));
    }
    Ok(())
}

/// Full `N`-bin unnormalized DFT of a real signal.
pub fn dft_forward(signal: &[f64]) -> Result<Vec<Complex64>, TransformError> {
    check_signal(signal)?;
    let fft = FftPlanner::new().plan_fft_forward(signal.len());
    let mut bins: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft.process(&mut bins);
    Ok(bins)
}

/// Inverse DFT (with the `1/N` factor) of a conjugate-symmetric spectrum.
///
/// The imaginary part of the result is discarded once it has been checked to
/// be below `SYMMETRY_TOLERANCE * max|x|`.
pub fn dft_inverse(spectrum: &[Complex64]) -> Result<Vec<f64>, TransformError> {
    if spectrum.is_empty() {
        return Err(TransformError::InvalidInput("empty spectrum".into()));
    }
    if spectrum.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(TransformError::InvalidInput("non-finite bin".into()));
    }
    let n = spectrum.len();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut buf = spectrum.to_vec();
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut residue = 0.0f64;
    let mut magnitude = 0.0f64;
    for c in &buf {
        residue = residue.max((c.im * scale).abs());
        magnitude = magnitude.max((c * scale).norm());
    }
    let tolerance = SYMMETRY_TOLERANCE * magnitude;
    if residue > tolerance {
        return Err(TransformError::SymmetryViolation { residue, tolerance });
    }
    Ok(buf.into_iter().map(|c| c.re * scale).collect())
}

/// Zipper transform: half-spectrum of the DFT packed into `N` reals.
pub fn zipper_pack(signal: &[f64], layout: Layout) -> Result<PackedSpectrum, TransformError> {
    check_signal(signal)?;
    let kind = match layout {
        Layout::Concatenating => TransformKind::ZipConcat,
        Layout::Interlacing => TransformKind::ZipInterlace,
    };
    let mut values = signal.to_vec();
    let kernel = Kernel::new(kind, signal.len())?;
    kernel.forward(&mut values, &mut kernel.scratch());
    Ok(PackedSpectrum { values, layout })
}

/// Inverse zipper transform.
pub fn zipper_unpack(packed: &PackedSpectrum) -> Result<Vec<f64>, TransformError> {
    check_signal(&packed.values)?;
    let kind = match packed.layout {
        Layout::Concatenating => TransformKind::ZipConcat,
        Layout::Interlacing => TransformKind::ZipInterlace,
    };
    let mut values = packed.values.clone();
    let kernel = Kernel::new(kind, values.len())?;
    kernel.inverse(&mut values, &mut kernel.scratch());
    Ok(values)
}

/// Unnormalized DCT-II: `X[k] = sum x[n] cos(pi (2n+1) k / 2N)`.
pub fn dct_forward(signal: &[f64]) -> Result<Vec<f64>, TransformError> {
    run_1d(TransformKind::Dct, signal, true)
}

/// DCT-III carrying the normalization: `x[n] = (X[0] + 2 sum X[k] cos(..)) / N`.
pub fn dct_inverse(coeffs: &[f64]) -> Result<Vec<f64>, TransformError> {
    run_1d(TransformKind::Dct, coeffs, false)
}

/// Unnormalized Walsh-Hadamard transform in natural (Hadamard) order.
pub fn fwht_forward(signal: &[f64]) -> Result<Vec<f64>, TransformError> {
    run_1d(TransformKind::Fwht, signal, true)
}

pub fn fwht_inverse(coeffs: &[f64]) -> Result<Vec<f64>, TransformError> {
    run_1d(TransformKind::Fwht, coeffs, false)
}

fn run_1d(kind: TransformKind, input: &[f64], forward: bool) -> Result<Vec<f64>, TransformError> {
    check_signal(input)?;
    let kernel = Kernel::new(kind, input.len())?;
    let mut out = input.to_vec();
    let mut scratch = kernel.scratch();
    if forward {
        kernel.forward(&mut out, &mut scratch);
    } else {
        kernel.inverse(&mut out, &mut scratch);
    }
    Ok(out)
}

/// Work buffers for a [`Kernel`]; one per thread.
#[derive(Debug, Default)]
pub struct Scratch {
    buf: Vec<Complex64>,
    fft: Vec<Complex64>,
}

/// A 1-D transform planned for a fixed length, applied in place.
///
/// Kernels are immutable and `Send + Sync`; per-call state lives in
/// [`Scratch`].
#[derive(Clone)]
pub struct Kernel {
    kind: TransformKind,
    len: usize,
    fft: Option<Arc<dyn Fft<f64>>>,
    ifft: Option<Arc<dyn Fft<f64>>>,
    // e^{-i pi k / 2N}, DCT only
    twiddles: Vec<Complex64>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("kind", &self.kind)
            .field("len", &self.len)
            .finish()
    }
}

impl Kernel {
    pub fn new(kind: TransformKind, len: usize) -> Result<Self, TransformError> {
        if len == 0 {
            return Err(TransformError::InvalidInput("zero-length kernel".into()));
        }
        if kind == TransformKind::Fwht && !len.is_power_of_two() {
            return Err(TransformError::NonPowerOfTwo(len));
        }
        let (fft, ifft) = if kind == TransformKind::Fwht {
            (None, None)
        } else {
            let mut planner = FftPlanner::new();
            (
                Some(planner.plan_fft_forward(len)),
                Some(planner.plan_fft_inverse(len)),
            )
        };
        let twiddles = if kind == TransformKind::Dct {
            (0..len)
                .map(|k| Complex64::from_polar(1.0, -PI * k as f64 / (2 * len) as f64))
                .collect()
        } else {
            Vec::new()
        };
        Ok(Kernel {
            kind,
            len,
            fft,
            ifft,
            twiddles,
        })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scratch(&self) -> Scratch {
        let fft_len = self
            .fft
            .iter()
            .chain(self.ifft.iter())
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Scratch {
            buf: vec![Complex64::default(); self.len],
            fft: vec![Complex64::default(); fft_len],
        }
    }

    /// Forward transform of `data` in place.
    ///
    /// Panics if `data.len()` differs from the planned length.
    pub fn forward(&self, data: &mut [f64], scratch: &mut Scratch) {
        assert_eq!(data.len(), self.len, "fiber length does not match kernel");
        match self.kind {
            TransformKind::ZipConcat => self.zip_forward(data, Layout::Concatenating, scratch),
            TransformKind::ZipInterlace => self.zip_forward(data, Layout::Interlacing, scratch),
            TransformKind::Dct => self.dct_forward(data, scratch),
            TransformKind::Fwht => fwht_in_place(data),
        }
    }

    /// Inverse transform of `data` in place.
    pub fn inverse(&self, data: &mut [f64], scratch: &mut Scratch) {
        assert_eq!(data.len(), self.len, "fiber length does not match kernel");
        match self.kind {
            TransformKind::ZipConcat => self.zip_inverse(data, Layout::Concatenating, scratch),
            TransformKind::ZipInterlace => self.zip_inverse(data, Layout::Interlacing, scratch),
            TransformKind::Dct => self.dct_inverse(data, scratch),
            TransformKind::Fwht => {
                fwht_in_place(data);
                let scale = 1.0 / self.len as f64;
                data.iter_mut().for_each(|v| *v *= scale);
            }
        }
    }

    fn ensure_scratch(&self, scratch: &mut Scratch) {
        if scratch.buf.len() != self.len {
            *scratch = self.scratch();
        }
    }

    fn zip_forward(&self, data: &mut [f64], layout: Layout, scratch: &mut Scratch) {
        self.ensure_scratch(scratch);
        let Scratch { buf, fft } = scratch;
        for (b, &x) in buf.iter_mut().zip(data.iter()) {
            *b = Complex64::new(x, 0.0);
        }
        let plan = self.fft.as_ref().expect("zipper kernel has an FFT plan");
        plan.process_with_scratch(buf, fft);
        pack_half_spectrum(buf, data, layout);
    }

    fn zip_inverse(&self, data: &mut [f64], layout: Layout, scratch: &mut Scratch) {
        self.ensure_scratch(scratch);
        let n = self.len;
        let Scratch { buf, fft } = scratch;
        unpack_half_spectrum(data, buf, layout);
        for k in (n / 2 + 1)..n {
            buf[k] = buf[n - k].conj();
        }
        let plan = self.ifft.as_ref().expect("zipper kernel has an FFT plan");
        plan.process_with_scratch(buf, fft);
        let scale = 1.0 / n as f64;
        for (x, c) in data.iter_mut().zip(buf.iter()) {
            *x = c.re * scale;
        }
    }

    // Makhoul's N-point FFT evaluation of the DCT-II.
    fn dct_forward(&self, data: &mut [f64], scratch: &mut Scratch) {
        self.ensure_scratch(scratch);
        let n = self.len;
        let Scratch { buf, fft } = scratch;
        for (i, &x) in data.iter().enumerate() {
            let j = if i % 2 == 0 { i / 2 } else { n - 1 - i / 2 };
            buf[j] = Complex64::new(x, 0.0);
        }
        let plan = self.fft.as_ref().expect("dct kernel has an FFT plan");
        plan.process_with_scratch(buf, fft);
        for (k, x) in data.iter_mut().enumerate() {
            *x = (buf[k] * self.twiddles[k]).re;
        }
    }

    fn dct_inverse(&self, data: &mut [f64], scratch: &mut Scratch) {
        self.ensure_scratch(scratch);
        let n = self.len;
        let Scratch { buf, fft } = scratch;
        for k in 0..n {
            let mirror = if k == 0 { 0.0 } else { data[n - k] };
            buf[k] = Complex64::new(data[k], -mirror) * self.twiddles[k].conj();
        }
        let plan = self.ifft.as_ref().expect("dct kernel has an FFT plan");
        plan.process_with_scratch(buf, fft);
        let scale = 1.0 / n as f64;
        for (i, x) in data.iter_mut().enumerate() {
            let j = if i % 2 == 0 { i / 2 } else { n - 1 - i / 2 };
            *x = buf[j].re * scale;
        }
    }
}

/// Number of bins that contribute both a real and an imaginary part.
fn complex_bins(n: usize) -> usize {
    (n - 1) / 2
}

fn has_nyquist(n: usize) -> bool {
    n.is_multiple_of(2)
}

/// Writes the `N` independent reals of `spectrum` (a full or half spectrum of
/// a length-`out.len()` real signal) into `out`.
fn pack_half_spectrum(spectrum: &[Complex64], out: &mut [f64], layout: Layout) {
    let n = out.len();
    let m = complex_bins(n);
    out[0] = spectrum[0].re;
    match layout {
        Layout::Concatenating => {
            for k in 1..=m {
                out[k] = spectrum[k].re;
            }
            let im_start = if has_nyquist(n) {
                out[m + 1] = spectrum[n / 2].re;
                m + 2
            } else {
                m + 1
            };
            for k in 1..=m {
                out[im_start + k - 1] = spectrum[k].im;
            }
        }
        Layout::Interlacing => {
            for k in 1..=m {
                out[2 * k - 1] = spectrum[k].re;
                out[2 * k] = spectrum[k].im;
            }
            if has_nyquist(n) {
                out[n - 1] = spectrum[n / 2].re;
            }
        }
    }
}

/// Inverse of [`pack_half_spectrum`]: fills bins `0..=N/2` of `spectrum`.
fn unpack_half_spectrum(packed: &[f64], spectrum: &mut [Complex64], layout: Layout) {
    let n = packed.len();
    let m = complex_bins(n);
    spectrum[0] = Complex64::new(packed[0], 0.0);
    match layout {
        Layout::Concatenating => {
            let im_start = if has_nyquist(n) { m + 2 } else { m + 1 };
            for k in 1..=m {
                spectrum[k] = Complex64::new(packed[k], packed[im_start + k - 1]);
            }
            if has_nyquist(n) {
                spectrum[n / 2] = Complex64::new(packed[m + 1], 0.0);
            }
        }
        Layout::Interlacing => {
            for k in 1..=m {
                spectrum[k] = Complex64::new(packed[2 * k - 1], packed[2 * k]);
            }
            if has_nyquist(n) {
                spectrum[n / 2] = Complex64::new(packed[n - 1], 0.0);
            }
        }
    }
}

fn fwht_in_place(data: &mut [f64]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let a = data[i];
                let b = data[i + h];
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
    }

    #[test]
    fn dft_of_constant_is_dc_only() {
        let f = dft_forward(&[3.0; 4]).unwrap();
        assert!((f[0].re - 12.0).abs() < 1e-12);
        assert!(f[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn dft_known_vector() {
        let f = dft_forward(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let want = [
            Complex64::new(10.0, 0.0),
            Complex64::new(-2.0, 2.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(-2.0, -2.0),
        ];
        for (a, b) in f.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
        let back = dft_inverse(&want).unwrap();
        assert!(close(&back, &[1.0, 2.0, 3.0, 4.0], 1e-12));
    }

    #[test]
    fn single_sample_identity() {
        assert_eq!(dft_forward(&[1.0]).unwrap(), vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(dft_inverse(&[Complex64::new(7.0, 0.0)]).unwrap(), vec![7.0]);
        for layout in [Layout::Concatenating, Layout::Interlacing] {
            assert_eq!(zipper_pack(&[5.0], layout).unwrap().values, vec![5.0]);
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(dft_forward(&[]), Err(TransformError::InvalidInput(_))));
        assert!(matches!(dft_inverse(&[]), Err(TransformError::InvalidInput(_))));
        assert!(dct_forward(&[]).is_err());
        assert!(fwht_forward(&[]).is_err());
        let empty = PackedSpectrum {
            values: vec![],
            layout: Layout::Concatenating,
        };
        assert!(zipper_unpack(&empty).is_err());
        assert!(dft_forward(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn asymmetric_spectrum_rejected() {
        let bad = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)];
        assert!(matches!(
            dft_inverse(&bad),
            Err(TransformError::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn zipper_known_layouts() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let c = zipper_pack(&x, Layout::Concatenating).unwrap();
        assert!(close(&c.values, &[10.0, -2.0, -2.0, 2.0], 1e-12));
        let i = zipper_pack(&x, Layout::Interlacing).unwrap();
        assert!(close(&i.values, &[10.0, -2.0, 2.0, -2.0], 1e-12));
        assert!(close(&zipper_unpack(&c).unwrap(), &x, 1e-12));
        assert!(close(&zipper_unpack(&i).unwrap(), &x, 1e-12));
    }

    #[test]
    fn zipper_of_constant() {
        for layout in [Layout::Concatenating, Layout::Interlacing] {
            let p = zipper_pack(&[2.5; 4], layout).unwrap();
            assert!(close(&p.values, &[10.0, 0.0, 0.0, 0.0], 1e-12));
            assert!(close(&zipper_unpack(&p).unwrap(), &[2.5; 4], 1e-12));
        }
    }

    #[test]
    fn two_sample_pack_is_real_bins() {
        let p = zipper_pack(&[1.0, 3.0], Layout::Interlacing).unwrap();
        assert!(close(&p.values, &[4.0, -2.0], 1e-12));
    }

    #[test]
    fn odd_length_layouts() {
        // N = 5: bins 0..=2, bins 1 and 2 complex.
        let x = [0.5, -1.0, 2.0, 4.0, 1.5];
        let f = dft_forward(&x).unwrap();
        let c = zipper_pack(&x, Layout::Concatenating).unwrap();
        let want_c = [f[0].re, f[1].re, f[2].re, f[1].im, f[2].im];
        assert!(close(&c.values, &want_c, 1e-12));
        let i = zipper_pack(&x, Layout::Interlacing).unwrap();
        let want_i = [f[0].re, f[1].re, f[1].im, f[2].re, f[2].im];
        assert!(close(&i.values, &want_i, 1e-12));
    }

    #[test]
    fn dct_constant_and_roundtrip() {
        let d = dct_forward(&[2.0; 4]).unwrap();
        assert!(close(&d, &[8.0, 0.0, 0.0, 0.0], 1e-12));
        let x = [1.0, -3.0, 0.25, 9.0, 4.0];
        assert!(close(&dct_inverse(&dct_forward(&x).unwrap()).unwrap(), &x, 1e-12));
    }

    #[test]
    fn fwht_known_values() {
        assert_eq!(fwht_forward(&[3.0, 3.0]).unwrap(), vec![6.0, 0.0]);
        assert_eq!(
            fwht_forward(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![10.0, -2.0, -4.0, 0.0]
        );
        assert_eq!(
            fwht_inverse(&[10.0, -2.0, -4.0, 0.0]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        assert_eq!(fwht_forward(&[1.0; 6]), Err(TransformError::NonPowerOfTwo(6)));
    }

    #[test]
    fn transform_ids_roundtrip() {
        for kind in TransformKind::ALL {
            assert_eq!(TransformKind::from_id(kind.id()), Some(kind));
            assert_eq!(TransformKind::from_name(kind.name()), Some(kind));
        }
        assert_eq!(TransformKind::from_id(4), None);
    }
}
