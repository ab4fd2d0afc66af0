//! Shared domain types: input arrays, error bounds and compression parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SzError};

/// Largest interval count whose codes still fit the 16-bit symbol field of
/// the Huffman table.
pub const MAX_INTERVALS: u32 = 65_535;

/// A validated 1-D array of finite single-precision values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloatArray(Vec<f32>);

impl FloatArray {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SzError::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    /// `(min, max)` of the values, or `None` when empty.
    pub fn value_range(&self) -> Option<(f32, f32)> {
        value_range(&self.0)
    }
}

impl TryFrom<Vec<f32>> for FloatArray {
    type Error = SzError;

    fn try_from(values: Vec<f32>) -> Result<Self> {
        Self::new(values)
    }
}

impl AsRef<[f32]> for FloatArray {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

pub(crate) fn value_range(values: &[f32]) -> Option<(f32, f32)> {
    let first = *values.first()?;
    Some(
        values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorBoundMode {
    Absolute,
    /// Fraction of the array's value range (max - min).
    Relative,
}

/// Per-point error bound. `resolved_abs` is filled in by [`resolve_error_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    pub mode: ErrorBoundMode,
    pub value: f64,
    pub resolved_abs: Option<f64>,
}

impl ErrorBound {
    pub fn absolute(value: f64) -> Self {
        Self {
            mode: ErrorBoundMode::Absolute,
            value,
            resolved_abs: None,
        }
    }

    pub fn relative(value: f64) -> Self {
        Self {
            mode: ErrorBoundMode::Relative,
            value,
            resolved_abs: None,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.value.is_finite() && self.value > 0.0) {
            return Err(SzError::invalid(format!(
                "error bound must be positive and finite, got {}",
                self.value
            )));
        }
        Ok(())
    }

    /// Absolute bound for a given value range. A zero range falls back to
    /// the raw value so the bound never collapses to zero.
    pub(crate) fn absolute_for_range(&self, range: f64) -> f64 {
        match self.mode {
            ErrorBoundMode::Absolute => self.value,
            ErrorBoundMode::Relative => {
                let abs = self.value * range;
                if abs > 0.0 {
                    abs
                } else {
                    self.value
                }
            }
        }
    }
}

/// Resolves `bound` against the value range of `array`.
pub fn resolve_error_bound(array: &FloatArray, bound: ErrorBound) -> Result<ErrorBound> {
    bound.check()?;
    let (lo, hi) = array.value_range().ok_or(SzError::EmptyInput)?;
    let range = f64::from(hi) - f64::from(lo);
    Ok(ErrorBound {
        resolved_abs: Some(bound.absolute_for_range(range)),
        ..bound
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predictor {
    /// Plain last-value prediction in input order.
    SzLv,
    /// Last-value prediction over per-segment sorted data.
    SzSort,
    /// Pattern matching against the reconstructed history with last-value fallback.
    SzPm,
}

impl Predictor {
    pub fn name(self) -> &'static str {
        match self {
            Predictor::SzLv => "sz-lv",
            Predictor::SzSort => "sz-sort",
            Predictor::SzPm => "sz-pm",
        }
    }

    /// Whether the output is the per-segment sorted permutation of the input.
    pub fn reorders(self) -> bool {
        !matches!(self, Predictor::SzLv)
    }

    pub(crate) fn to_byte(self) -> u8 {
        match self {
            Predictor::SzLv => 0,
            Predictor::SzSort => 1,
            Predictor::SzPm => 2,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Predictor::SzLv),
            1 => Some(Predictor::SzSort),
            2 => Some(Predictor::SzPm),
            _ => None,
        }
    }
}

impl std::str::FromStr for Predictor {
    type Err = SzError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sz-lv" | "lv" => Ok(Predictor::SzLv),
            "sz-sort" | "sz" | "sort" => Ok(Predictor::SzSort),
            "sz-pm" | "pm" => Ok(Predictor::SzPm),
            other => Err(SzError::invalid(format!("unknown predictor '{other}'"))),
        }
    }
}

impl std::fmt::Display for Predictor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// User-facing compression parameters. Unset fields take their defaults
/// during [`validate_params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionParams {
    pub error_bound: ErrorBound,
    pub intervals: u32,
    pub predictor: Predictor,
    /// Search buffer size in points.
    pub m: usize,
    /// Look-ahead buffer size (and sort segment size) in points.
    pub n: usize,
    /// Exponent of the Lp distance.
    pub p: f64,
    /// Match threshold; `None` means half the search buffer size.
    pub theta: Option<f64>,
    pub final_lz77: bool,
}

impl Default for CompressionParams {
    fn default() -> Self {
        Self {
            error_bound: ErrorBound::relative(1e-4),
            intervals: 511,
            predictor: Predictor::SzPm,
            m: 1024,
            n: 8,
            p: 0.5,
            theta: None,
            final_lz77: false,
        }
    }
}

impl CompressionParams {
    pub fn with_predictor(mut self, predictor: Predictor) -> Self {
        self.predictor = predictor;
        self
    }

    pub fn with_error_bound(mut self, bound: ErrorBound) -> Self {
        self.error_bound = bound;
        self
    }

    pub fn with_intervals(mut self, intervals: u32) -> Self {
        self.intervals = intervals;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_final_lz77(mut self, on: bool) -> Self {
        self.final_lz77 = on;
        self
    }
}

/// Parameters after validation, with every default resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidatedParams {
    pub error_bound: ErrorBound,
    pub intervals: u32,
    pub predictor: Predictor,
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub theta: f64,
    pub final_lz77: bool,
}

impl ValidatedParams {
    /// Bits needed to store a pattern-match offset: `ceil(log2(m))`.
    pub fn offset_bits(&self) -> u32 {
        offset_bits(self.m)
    }

    /// Quantization code that stands for a zero residual.
    pub fn center(&self) -> u32 {
        (self.intervals - 1) / 2
    }
}

pub(crate) fn offset_bits(m: usize) -> u32 {
    if m <= 1 {
        0
    } else {
        usize::BITS - (m - 1).leading_zeros()
    }
}

pub fn validate_params(params: &CompressionParams) -> Result<ValidatedParams> {
    params.error_bound.check()?;
    if let Some(abs) = params.error_bound.resolved_abs {
        if !(abs.is_finite() && abs > 0.0) {
            return Err(SzError::invalid("resolved error bound must be positive"));
        }
    }
    if params.intervals % 2 == 0 {
        return Err(SzError::invalid("intervals must be odd"));
    }
    if params.intervals > MAX_INTERVALS {
        return Err(SzError::invalid(format!(
            "intervals must not exceed {MAX_INTERVALS}"
        )));
    }
    if params.n == 0 || params.m == 0 {
        return Err(SzError::invalid("buffer sizes must be at least 1"));
    }
    if params.n > params.m {
        return Err(SzError::invalid("look-ahead exceeds search buffer"));
    }
    if u32::try_from(params.m).is_err() {
        return Err(SzError::invalid("search buffer too large"));
    }
    if !(params.p.is_finite() && params.p > 0.0) {
        return Err(SzError::invalid(format!(
            "p must be positive and finite, got {}",
            params.p
        )));
    }
    let theta = params.theta.unwrap_or(0.5 * params.m as f64);
    // theta = 0 disables matching and +inf accepts every candidate.
    if theta.is_nan() || theta < 0.0 {
        return Err(SzError::invalid(format!(
            "theta must be non-negative, got {theta}"
        )));
    }
    Ok(ValidatedParams {
        error_bound: params.error_bound,
        intervals: params.intervals,
        predictor: params.predictor,
        m: params.m,
        n: params.n,
        p: params.p,
        theta,
        final_lz77: params.final_lz77,
    })
}
