//! Error-controlled linear quantization of prediction residuals.
//!
//! A residual `real - predicted` is mapped to the nearest multiple of
//! `2 * eb`; the multiple, offset by the center code, is the quantization
//! code. Points whose code falls outside `[0, intervals)` or whose
//! single-precision reconstruction would miss the bound are stored verbatim.

use crate::error::{Result, Section, SzError};

/// Outcome of quantizing one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantized {
    Code(u16),
    Unpredictable,
}

/// Linear quantizer for a fixed bound and interval count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    eb: f64,
    intervals: u32,
    center: i64,
}

impl Quantizer {
    pub fn new(eb_abs: f64, intervals: u32) -> Result<Self> {
        if !(eb_abs.is_finite() && eb_abs > 0.0) {
            return Err(SzError::invalid("error bound must be positive"));
        }
        if intervals % 2 == 0 || intervals > crate::params::MAX_INTERVALS {
            return Err(SzError::invalid("intervals must be odd"));
        }
        Ok(Self {
            eb: eb_abs,
            intervals,
            center: i64::from((intervals - 1) / 2),
        })
    }

    pub fn eb(&self) -> f64 {
        self.eb
    }

    pub fn intervals(&self) -> u32 {
        self.intervals
    }

    pub fn center(&self) -> u16 {
        self.center as u16
    }

    /// Returns the code (or `Unpredictable`) and the value the decoder will
    /// reconstruct. Unpredictable points reconstruct to `real` itself.
    pub fn quantize(&self, real: f32, predicted: f64) -> (Quantized, f32) {
        let steps = ((f64::from(real) - predicted) / (2.0 * self.eb)).round();
        if !steps.is_finite() || steps.abs() > self.center as f64 {
            return (Quantized::Unpredictable, real);
        }
        let code = (self.center + steps as i64) as u16;
        let recon = self.reconstruct(code, predicted);
        if recon.is_finite() && (f64::from(real) - f64::from(recon)).abs() <= self.eb {
            (Quantized::Code(code), recon)
        } else {
            (Quantized::Unpredictable, real)
        }
    }

    /// Inverse of [`Quantizer::quantize`]; shared by both directions so the
    /// results agree bit for bit.
    pub fn dequantize(&self, code: u16, predicted: f64) -> Result<f32> {
        if u32::from(code) >= self.intervals {
            return Err(SzError::corrupt(
                Section::Codes,
                format!("code {code} outside {} intervals", self.intervals),
            ));
        }
        Ok(self.reconstruct(code, predicted))
    }

    fn reconstruct(&self, code: u16, predicted: f64) -> f32 {
        let steps = i64::from(code) - self.center;
        (predicted + steps as f64 * 2.0 * self.eb) as f32
    }
}

/// Free-function form of [`Quantizer::quantize`].
pub fn quantize_residual(
    real: f32,
    predicted: f64,
    eb_abs: f64,
    intervals: u32,
) -> Result<(Quantized, f32)> {
    Ok(Quantizer::new(eb_abs, intervals)?.quantize(real, predicted))
}

pub fn dequantize(code: u16, predicted: f64, eb_abs: f64, intervals: u32) -> Result<f32> {
    Quantizer::new(eb_abs, intervals)?.dequantize(code, predicted)
}

/// Per-point output of a quantization pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuantizedStream {
    /// One code per predictable point, in input order.
    pub codes: Vec<u16>,
    /// `true` for quantized points, `false` for verbatim ones.
    pub predictable: Vec<bool>,
    /// Original values of the unpredictable points, in input order.
    pub unpredictable_values: Vec<f32>,
}

impl QuantizedStream {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            codes: Vec::with_capacity(n),
            predictable: Vec::with_capacity(n),
            unpredictable_values: Vec::new(),
        }
    }

    pub fn push(&mut self, q: Quantized, real: f32) {
        match q {
            Quantized::Code(c) => {
                self.codes.push(c);
                self.predictable.push(true);
            }
            Quantized::Unpredictable => {
                self.unpredictable_values.push(real);
                self.predictable.push(false);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.predictable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictable.is_empty()
    }

    /// Indices of the unpredictable points.
    pub fn unpredictable_positions(&self) -> Vec<u64> {
        self.predictable
            .iter()
            .enumerate()
            .filter(|(_, &p)| !p)
            .map(|(i, _)| i as u64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_residual_maps_to_center() {
        let q = Quantizer::new(0.1, 511).unwrap();
        let (code, recon) = q.quantize(3.25, 3.25);
        assert_eq!(code, Quantized::Code(255));
        assert_eq!(recon, 3.25);
    }

    #[test]
    fn exact_step_up() {
        let q = Quantizer::new(0.25, 511).unwrap();
        let (code, recon) = q.quantize(1.5, 1.0);
        assert_eq!(code, Quantized::Code(256));
        assert_eq!(recon, 1.5);
    }

    #[test]
    fn rounds_half_away_from_zero() {
        let q = Quantizer::new(0.5, 511).unwrap();
        // residual of exactly half a step (0.5) rounds outward
        assert_eq!(q.quantize(0.5, 0.0).0, Quantized::Code(256));
        assert_eq!(q.quantize(-0.5, 0.0).0, Quantized::Code(254));
    }

    #[test]
    fn out_of_range_is_unpredictable() {
        let q = Quantizer::new(0.1, 511).unwrap();
        let (code, recon) = q.quantize(1000.0, 0.0);
        assert_eq!(code, Quantized::Unpredictable);
        assert_eq!(recon, 1000.0);
        // largest representable residual is 255 steps of 0.2 = 51
        assert!(matches!(q.quantize(50.9, 0.0).0, Quantized::Code(510)));
    }

    #[test]
    fn precision_loss_is_unpredictable() {
        // f32 spacing at 2^23 is 1.0: the in-range reconstruction 2^23 + 0.7
        // rounds to 2^23 + 1, which misses a 0.75 bound.
        let q = Quantizer::new(0.75, 511).unwrap();
        let real = 8_388_608.0_f32;
        let (code, recon) = q.quantize(real, 8_388_608.7);
        assert_eq!(code, Quantized::Unpredictable);
        assert_eq!(recon, real);
    }

    #[test]
    fn dequantize_examples() {
        assert_eq!(dequantize(255, 7.5, 0.1, 511).unwrap(), 7.5);
        assert_eq!(dequantize(254, 0.0, 0.1, 511).unwrap(), -0.2);
        let err = dequantize(511, 0.0, 0.1, 511).unwrap_err();
        assert!(err.to_string().contains("corrupt stream"));
    }

    #[test]
    fn single_interval_only_accepts_near_exact() {
        let q = Quantizer::new(1.0, 1).unwrap();
        assert_eq!(q.quantize(1.0, 0.0).0, Quantized::Unpredictable);
        assert_eq!(q.quantize(0.9, 0.0).0, Quantized::Code(0));
    }

    #[test]
    fn stream_bookkeeping() {
        let mut s = QuantizedStream::default();
        s.push(Quantized::Code(3), 1.0);
        s.push(Quantized::Unpredictable, 9.0);
        s.push(Quantized::Code(4), 2.0);
        assert_eq!(s.codes, vec![3, 4]);
        assert_eq!(s.unpredictable_values, vec![9.0]);
        assert_eq!(s.unpredictable_positions(), vec![1]);
        assert_eq!(s.predictable.iter().filter(|&&b| b).count(), s.codes.len());
    }
}
