//! Uniform scalar quantization of transform coefficients.

use crate::error::TransformError;

/// Largest symbol magnitude accepted; keeps `s * step` exactly representable
/// and leaves headroom in the zigzag varint encoding.
pub const MAX_SYMBOL: i64 = 1 << 52;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    step: f64,
}

impl QuantizerConfig {
    pub fn new(step: f64) -> Result<Self, TransformError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(TransformError::InvalidInput(format!(
                "quantizer step {step} must be positive and finite"
            )));
        }
        Ok(QuantizerConfig { step })
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        QuantizerConfig { step: 1.0 }
    }
}

/// `round(c / step)` with ties away from zero.
pub fn quantize(coeffs: &[f64], config: &QuantizerConfig) -> Result<Vec<i64>, TransformError> {
    let mut out = Vec::with_capacity(coeffs.len());
    quantize_into(coeffs, config, &mut out)?;
    Ok(out)
}

/// Appends the quantized `coeffs` to `out`.
pub fn quantize_into(
    coeffs: &[f64],
    config: &QuantizerConfig,
    out: &mut Vec<i64>,
) -> Result<(), TransformError> {
    out.reserve(coeffs.len());
    for (i, &c) in coeffs.iter().enumerate() {
        if !c.is_finite() {
            return Err(TransformError::InvalidInput(format!(
                "coefficient {i} is not finite"
            )));
        }
        let s = (c / config.step).round();
        if s.abs() > MAX_SYMBOL as f64 {
            return Err(TransformError::InvalidInput(format!(
                "coefficient {c} overflows the symbol range at step {}",
                config.step
            )));
        }
        out.push(s as i64);
    }
    Ok(())
}

/// `s * step`.
pub fn dequantize(symbols: &[i64], config: &QuantizerConfig) -> Vec<f64> {
    symbols.iter().map(|&s| s as f64 * config.step).collect()
}
