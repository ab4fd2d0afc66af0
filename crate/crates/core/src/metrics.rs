//! Bit accounting, code histograms and error verification.

use std::io::Write;

use serde::Serialize;

use crate::codec::transform_input;
use crate::error::{Result, SzError};
use crate::format::CompressedArtifact;
use crate::huffman;
use crate::params::{validate_params, CompressionParams, FloatArray, Predictor};

/// Size of an artifact broken down per component, in bits per input value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeBreakdown {
    pub predictor: Predictor,
    pub n: usize,
    pub values: u64,
    pub total_bytes: u64,
    /// Huffman table plus code bitstream.
    pub quant_codes: f64,
    pub predmd: f64,
    pub offsets: f64,
    pub means: f64,
    /// Verbatim values plus their positions.
    pub unpredictable: f64,
    /// Header, section framing, padding and the effect of the LZ77 wrapper.
    pub overhead: f64,
    /// Total artifact bits divided by the value count.
    pub overall: f64,
    pub compression_ratio: f64,
    /// Fraction of look-ahead sequences predicted by pattern matching.
    pub pm_ratio: f64,
    pub sequences: u64,
    pub matched_sequences: u64,
    pub unpredictable_count: u64,
}

impl SizeBreakdown {
    /// Sum of the component columns, header/framing excluded.
    pub fn payload(&self) -> f64 {
        self.quant_codes + self.predmd + self.offsets + self.means + self.unpredictable
    }

    pub fn component_sum(&self) -> f64 {
        self.payload() + self.overhead
    }

    pub fn predictable_fraction(&self) -> f64 {
        if self.values == 0 {
            1.0
        } else {
            1.0 - self.unpredictable_count as f64 / self.values as f64
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl std::fmt::Display for SizeBreakdown {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "predictor          {} (n = {})", self.predictor, self.n)?;
        writeln!(f, "values             {}", self.values)?;
        writeln!(f, "artifact bytes     {}", self.total_bytes)?;
        writeln!(f, "quant codes        {:.2} bits/value", self.quant_codes)?;
        if self.predictor == Predictor::SzPm {
            writeln!(f, "predmd             {:.3} bits/value", self.predmd)?;
            writeln!(f, "pm ratio           {:.1}%", self.pm_ratio * 100.0)?;
            writeln!(f, "offsets            {:.2} bits/value", self.offsets)?;
            writeln!(f, "means              {:.2} bits/value", self.means)?;
        }
        writeln!(f, "unpredictable      {:.2} bits/value", self.unpredictable)?;
        writeln!(f, "overhead           {:.2} bits/value", self.overhead)?;
        writeln!(f, "overall            {:.2} bits/value", self.overall)?;
        write!(f, "compression ratio  {:.2}", self.compression_ratio)
    }
}

/// Measures every component from the serialized sections of `artifact`.
pub fn bit_accounting(artifact: &CompressedArtifact) -> SizeBreakdown {
    let params = artifact.params();
    let sections = artifact.sections();
    let total_bytes = artifact.to_bytes().len() as u64;
    let values = artifact.header.len;
    let sequences = artifact.predmd.len() as u64;
    let matched = artifact.matched_sequences() as u64;

    let quant_bits = sections.table.len() as u64 * 8 + artifact.code_bits;
    let predmd_bits = sequences;
    let offset_bits = matched * u64::from(params.offset_bits());
    let mean_bits = matched * 32;
    // count prefix is framing; positions and values are payload
    let unpred_bits = (sections.unpredictable.len() as u64 - 8) * 8;
    let total_bits = total_bytes * 8;
    let overhead_bits =
        total_bits as f64 - (quant_bits + predmd_bits + offset_bits + mean_bits + unpred_bits) as f64;

    let per = |bits: f64| if values == 0 { 0.0 } else { bits / values as f64 };
    let overall = per(total_bits as f64);
    SizeBreakdown {
        predictor: params.predictor,
        n: params.n,
        values,
        total_bytes,
        quant_codes: per(quant_bits as f64),
        predmd: per(predmd_bits as f64),
        offsets: per(offset_bits as f64),
        means: per(mean_bits as f64),
        unpredictable: per(unpred_bits as f64),
        overhead: per(overhead_bits),
        overall,
        compression_ratio: if overall > 0.0 { 32.0 / overall } else { f64::INFINITY },
        pm_ratio: if sequences == 0 { 0.0 } else { matched as f64 / sequences as f64 },
        sequences,
        matched_sequences: matched,
        unpredictable_count: artifact.unpredictable_values.len() as u64,
    }
}

/// Offset cost in bits/value for a given match ratio: `offset_bits * r / n`.
pub fn offset_bits_per_value(offset_bits: u32, pm_ratio: f64, n: usize) -> f64 {
    f64::from(offset_bits) * pm_ratio / n as f64
}

/// Mean-value cost in bits/value for a given match ratio: `32 * r / n`.
pub fn mean_bits_per_value(pm_ratio: f64, n: usize) -> f64 {
    32.0 * pm_ratio / n as f64
}

/// Rounds to the two decimals used in reports.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Frequency of every quantization code in `[0, intervals)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeHistogram {
    pub counts: Vec<u64>,
    pub center: usize,
}

impl CodeHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Share of codes sitting exactly on the center (zero-residual) code.
    pub fn center_mass(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.counts[self.center] as f64 / total as f64
        }
    }

    /// Share of codes within `radius` of the center.
    pub fn mass_within(&self, radius: usize) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let lo = self.center.saturating_sub(radius);
        let hi = (self.center + radius).min(self.counts.len() - 1);
        self.counts[lo..=hi].iter().sum::<u64>() as f64 / total as f64
    }

    /// Writes `code,count` rows (with header) for every non-empty code.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["code", "count"])?;
        for (code, &count) in self.counts.iter().enumerate() {
            if count > 0 {
                w.write_record([code.to_string(), count.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn code_histogram(artifact: &CompressedArtifact) -> Result<CodeHistogram> {
    let params = artifact.params();
    let codes = huffman::decode(
        &artifact.code_stream,
        artifact.code_bits,
        &artifact.table,
        artifact.code_count as usize,
    )?;
    Ok(histogram_of(&codes, params.intervals))
}

pub(crate) fn histogram_of(codes: &[u16], intervals: u32) -> CodeHistogram {
    let mut counts = vec![0u64; intervals as usize];
    for &c in codes {
        counts[c as usize] += 1;
    }
    CodeHistogram {
        counts,
        center: ((intervals - 1) / 2) as usize,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub max_abs_error: f64,
    pub max_error_index: Option<usize>,
    pub violations: usize,
    pub first_violation: Option<usize>,
    pub bound: f64,
    pub pass: bool,
}

/// Point-wise check that every `|original - decompressed| <= eb_abs`.
pub fn verify_error_bound(original: &[f32], decompressed: &[f32], eb_abs: f64) -> Result<ErrorReport> {
    if original.len() != decompressed.len() {
        return Err(SzError::LengthMismatch {
            left: original.len(),
            right: decompressed.len(),
        });
    }
    let mut report = ErrorReport {
        max_abs_error: 0.0,
        max_error_index: None,
        violations: 0,
        first_violation: None,
        bound: eb_abs,
        pass: true,
    };
    for (i, (&a, &b)) in original.iter().zip(decompressed).enumerate() {
        let err = (f64::from(a) - f64::from(b)).abs();
        if report.max_error_index.is_none() || err > report.max_abs_error || err.is_nan() {
            report.max_abs_error = err;
            report.max_error_index = Some(i);
        }
        if !(err <= eb_abs) {
            report.violations += 1;
            report.first_violation.get_or_insert(i);
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}

/// Applies the predictor's reordering to `original` and resolves the bound
/// against it before checking.
pub fn verify_with_params(
    original: &FloatArray,
    decompressed: &[f32],
    params: &CompressionParams,
) -> Result<ErrorReport> {
    let v = validate_params(params)?;
    let (lo, hi) = original.value_range().unwrap_or((0.0, 0.0));
    let eb = v.error_bound.absolute_for_range(f64::from(hi) - f64::from(lo));
    verify_error_bound(&transform_input(original.as_slice(), &v), decompressed, eb)
}

/// One labelled row of a comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub breakdown: SizeBreakdown,
}

/// Text table with the classic column set: quantization code size, predmd,
/// PM ratio, offset, mean, overall bit-rate and compression ratio.
pub fn format_comparison(rows: &[ComparisonRow]) -> String {
    let mut out = format!(
        "{:<12} {:>10} {:>8} {:>8} {:>8} {:>8} {:>9} {:>7}\n",
        "config", "quant", "predmd", "pm%", "offset", "mean", "overall", "CR"
    );
    for r in rows {
        let b = &r.breakdown;
        let (predmd, pm, off, mean) = if b.predictor == Predictor::SzPm {
            (
                format!("1/{}", b.n),
                format!("{:.1}%", b.pm_ratio * 100.0),
                format!("{:.2}", b.offsets),
                format!("{:.2}", b.means),
            )
        } else {
            ("/".into(), "/".into(), "/".into(), "/".into())
        };
        out.push_str(&format!(
            "{:<12} {:>10.2} {:>8} {:>8} {:>8} {:>8} {:>9.2} {:>7.2}\n",
            r.label, b.quant_codes, predmd, pm, off, mean, b.overall, b.compression_ratio
        ));
    }
    out
}

/// CSV version of [`format_comparison`], with every component column.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "config",
        "predictor",
        "n",
        "values",
        "bytes",
        "quant_codes",
        "predmd",
        "pm_ratio",
        "offsets",
        "means",
        "unpredictable",
        "overhead",
        "overall",
        "compression_ratio",
    ])?;
    for r in rows {
        let b = &r.breakdown;
        w.write_record([
            r.label.clone(),
            b.predictor.to_string(),
            b.n.to_string(),
            b.values.to_string(),
            b.total_bytes.to_string(),
            format!("{:.2}", b.quant_codes),
            format!("{:.4}", b.predmd),
            format!("{:.4}", b.pm_ratio),
            format!("{:.2}", b.offsets),
            format!("{:.2}", b.means),
            format!("{:.2}", b.unpredictable),
            format!("{:.2}", b.overhead),
            format!("{:.2}", b.overall),
            format!("{:.2}", b.compression_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}
