//! Compression and decompression for all three predictors.
//!
//! Both directions run the same closed-loop driver: every prediction is made
//! from values the decoder will also have reconstructed, so the
//! decompressed stream equals the compressor's in-loop stream bit for bit.

use crate::error::{Result, Section, SzError};
use crate::format::{CompressedArtifact, Header};
use crate::huffman::{self, EncodedBits, HuffmanTable};
use crate::params::{
    validate_params, CompressionParams, FloatArray, Predictor, ValidatedParams,
};
use crate::pm::{self, PatternMatcher, PmRecord, SequencePrediction, SlidingWindow};
use crate::predict::{predict_last_value, segment_sort};
use crate::quantize::{QuantizedStream, Quantizer};

/// Compressor output together with its in-loop reconstruction.
#[derive(Debug, Clone)]
pub struct CompressionTrace {
    pub artifact: CompressedArtifact,
    /// Values the decompressor will produce, in (possibly reordered) output order.
    pub reconstructed: Vec<f32>,
    /// The input after the predictor's reordering; the error bound holds against this.
    pub transformed: Vec<f32>,
    pub stream: QuantizedStream,
}

/// The array the compressor actually encodes: per-segment sorted for the
/// sorting predictors, untouched for plain last-value.
pub fn transform_input(values: &[f32], params: &ValidatedParams) -> Vec<f32> {
    if params.predictor.reorders() {
        segment_sort(values, params.n).into_values()
    } else {
        values.to_vec()
    }
}

pub fn compress(array: &FloatArray, params: &CompressionParams) -> Result<CompressedArtifact> {
    compress_with_trace(array, params).map(|t| t.artifact)
}

pub fn compress_with_trace(
    array: &FloatArray,
    params: &CompressionParams,
) -> Result<CompressionTrace> {
    let mut params = validate_params(params)?;
    let (min, max) = array.value_range().unwrap_or((0.0, 0.0));
    let resolved_abs = params
        .error_bound
        .absolute_for_range(f64::from(max) - f64::from(min));
    params.error_bound.resolved_abs = Some(resolved_abs);
    let quantizer = Quantizer::new(resolved_abs, params.intervals)?;

    let data = transform_input(array.as_slice(), &params);
    let mut stream = QuantizedStream::with_capacity(data.len());
    let mut records: Vec<PmRecord> = Vec::new();
    let mut matcher = PatternMatcher::new(&params);

    let reconstructed = drive(
        data.len(),
        &params,
        |start, history| {
            let lookahead = &data[start..start + params.n];
            let m = matcher.find(history, lookahead);
            let prediction = if m.matched {
                matcher.predict(lookahead, &m)
            } else {
                pm::pm_fallback_predict(&SlidingWindow::at(history, lookahead, start, params.m))
            };
            records.push(prediction.record());
            Ok(prediction)
        },
        |i, predicted| {
            let (q, recon) = quantizer.quantize(data[i], predicted);
            stream.push(q, data[i]);
            Ok(recon)
        },
    )?;

    let (table, encoded) = if stream.codes.is_empty() {
        (
            HuffmanTable::from_lengths(Vec::new())?,
            EncodedBits {
                bytes: Vec::new(),
                bit_len: 0,
            },
        )
    } else {
        let table = huffman::build_table(&stream.codes)?;
        let encoded = huffman::encode(&stream.codes, &table)?;
        (table, encoded)
    };

    let mut predmd = Vec::with_capacity(records.len());
    let mut offsets = Vec::new();
    let mut means = Vec::new();
    for r in &records {
        predmd.push(r.predmd_bit());
        if let PmRecord::Matched { offset, mean } = *r {
            offsets.push(offset);
            means.push(mean);
        }
    }

    let artifact = CompressedArtifact {
        header: Header {
            params,
            resolved_abs,
            len: data.len() as u64,
            min,
            max,
        },
        table,
        code_count: stream.codes.len() as u64,
        code_bits: encoded.bit_len,
        code_stream: encoded.bytes,
        predmd,
        offsets,
        means,
        unpredictable_positions: stream.unpredictable_positions(),
        unpredictable_values: stream.unpredictable_values.clone(),
    };
    Ok(CompressionTrace {
        artifact,
        reconstructed,
        transformed: data,
        stream,
    })
}

pub fn decompress(artifact: &CompressedArtifact) -> Result<FloatArray> {
    artifact.check_consistency()?;
    let params = artifact.header.params;
    let len = artifact.len();
    let quantizer = Quantizer::new(artifact.header.resolved_abs, params.intervals)?;
    let codes = huffman::decode(
        &artifact.code_stream,
        artifact.code_bits,
        &artifact.table,
        artifact.code_count as usize,
    )?;

    let mut codes = codes.into_iter();
    let mut unpredictable = artifact
        .unpredictable_positions
        .iter()
        .zip(&artifact.unpredictable_values)
        .peekable();
    let mut predmd = artifact.predmd.iter();
    let mut side = artifact.offsets.iter().zip(&artifact.means);

    let values = drive(
        len,
        &params,
        |start, history| {
            let fallback = *predmd
                .next()
                .ok_or_else(|| SzError::corrupt(Section::Predmd, "too few records"))?;
            let window = SlidingWindow::at(history, &[], start, params.m);
            if fallback {
                return Ok(pm::pm_fallback_predict(&window));
            }
            let (&offset, &mean) = side
                .next()
                .ok_or_else(|| SzError::corrupt(Section::Offsets, "too few offsets"))?;
            let candidate = window
                .search
                .get(offset as usize..offset as usize + params.n)
                .ok_or_else(|| SzError::corrupt(Section::Offsets, "offset beyond available history"))?;
            Ok(pm::pattern_prediction(candidate, offset, mean))
        },
        |i, predicted| {
            if let Some((_, &value)) = unpredictable.next_if(|&(&pos, _)| pos == i as u64) {
                return Ok(value);
            }
            let code = codes
                .next()
                .ok_or_else(|| SzError::corrupt(Section::Codes, "too few codes"))?;
            let v = quantizer.dequantize(code, predicted)?;
            if !v.is_finite() {
                return Err(SzError::corrupt(Section::Codes, "non-finite reconstruction"));
            }
            Ok(v)
        },
    )?;
    FloatArray::new(values)
}

pub fn decompress_bytes(bytes: &[u8]) -> Result<FloatArray> {
    decompress(&CompressedArtifact::from_bytes(bytes)?)
}

/// Closed-loop prediction driver shared by both directions.
///
/// `decide(start, history)` chooses the predictor for the look-ahead
/// sequence starting at `start` (pattern-matching predictor only);
/// `step(index, predicted)` quantizes or decodes one point and returns its
/// reconstruction.
fn drive(
    len: usize,
    params: &ValidatedParams,
    mut decide: impl FnMut(usize, &[f32]) -> Result<SequencePrediction>,
    mut step: impl FnMut(usize, f64) -> Result<f32>,
) -> Result<Vec<f32>> {
    let mut recon: Vec<f32> = Vec::with_capacity(len);
    let mut sequenced = 0;
    if params.predictor == Predictor::SzPm {
        let n = params.n;
        sequenced = len / n * n;
        for start in (0..sequenced).step_by(n) {
            let prediction = decide(start, &recon)?;
            for i in 0..n {
                let predicted = prediction.predict(i, &recon[start..]);
                let r = step(start + i, predicted)?;
                recon.push(r);
            }
        }
    }
    // Plain last-value prediction, also for the trailing partial sequence.
    for i in sequenced..len {
        let predicted = f64::from(predict_last_value(&recon, i));
        let r = step(i, predicted)?;
        recon.push(r);
    }
    Ok(recon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ErrorBound;

    fn arr(v: Vec<f32>) -> FloatArray {
        FloatArray::new(v).unwrap()
    }

    fn wave(n: usize) -> Vec<f32> {
        (0..n).map(|i| ((i as f32) * 0.37).sin() * 50.0 + (i % 7) as f32).collect()
    }

    #[test]
    fn constant_array_all_center() {
        for predictor in [Predictor::SzLv, Predictor::SzSort, Predictor::SzPm] {
            let params = CompressionParams::default()
                .with_predictor(predictor)
                .with_error_bound(ErrorBound::absolute(0.01));
            let t = compress_with_trace(&arr(vec![0.0; 100]), &params).unwrap();
            assert!(t.stream.codes.iter().all(|&c| c == 255), "{predictor}");
            assert_eq!(decompress(&t.artifact).unwrap().as_slice(), &[0.0; 100]);
        }
    }

    #[test]
    fn roundtrip_respects_bound_all_predictors() {
        let data = wave(1000);
        for predictor in [Predictor::SzLv, Predictor::SzSort, Predictor::SzPm] {
            let params = CompressionParams::default()
                .with_predictor(predictor)
                .with_m(64)
                .with_theta(200.0)
                .with_error_bound(ErrorBound::relative(1e-3));
            let t = compress_with_trace(&arr(data.clone()), &params).unwrap();
            let bytes = t.artifact.to_bytes();
            let out = decompress_bytes(&bytes).unwrap();
            assert_eq!(out.as_slice(), t.reconstructed.as_slice());
            let eb = t.artifact.header.resolved_abs;
            for (a, b) in t.transformed.iter().zip(out.as_slice()) {
                assert!((f64::from(*a) - f64::from(*b)).abs() <= eb);
            }
        }
    }

    #[test]
    fn short_array_uses_fallback_only() {
        let params = CompressionParams::default().with_n(8);
        let a = compress(&arr(vec![1.0, 2.0, 3.0]), &params).unwrap();
        assert!(a.predmd.is_empty());
        assert_eq!(decompress(&a).unwrap().len(), 3);
    }

    #[test]
    fn empty_array_roundtrips() {
        let a = compress(&FloatArray::default(), &CompressionParams::default()).unwrap();
        let back = CompressedArtifact::from_bytes(&a.to_bytes()).unwrap();
        assert!(decompress(&back).unwrap().is_empty());
    }

    #[test]
    fn pm_with_theta_zero_equals_sorted_baseline_codes() {
        let data = arr(wave(800));
        let base = CompressionParams::default().with_m(64).with_n(8);
        let pm = compress_with_trace(&data, &base.clone().with_theta(0.0)).unwrap();
        let sorted = compress_with_trace(&data, &base.with_predictor(Predictor::SzSort)).unwrap();
        assert_eq!(pm.stream, sorted.stream);
        assert_eq!(pm.artifact.matched_sequences(), 0);
        assert_eq!(pm.artifact.predmd.len(), 100);
    }

    #[test]
    fn trailing_partial_sequence_has_no_record() {
        let params = CompressionParams::default().with_m(32).with_n(8);
        let a = compress(&arr(wave(8 * 10 + 5)), &params).unwrap();
        assert_eq!(a.predmd.len(), 10);
        assert_eq!(decompress(&a).unwrap().len(), 85);
    }

    #[test]
    fn lz77_wrapped_decodes_identically() {
        let data = arr(wave(2000));
        let plain = CompressionParams::default().with_m(64).with_theta(100.0);
        let a = compress(&data, &plain).unwrap();
        let b = compress(&data, &plain.with_final_lz77(true)).unwrap();
        let bb = b.to_bytes();
        assert_ne!(a.to_bytes(), bb);
        assert_eq!(
            decompress_bytes(&a.to_bytes()).unwrap(),
            decompress_bytes(&bb).unwrap()
        );
    }

    #[test]
    fn corrupt_artifacts_fail_cleanly() {
        let data = arr(wave(4000));
        let params = CompressionParams::default().with_m(64).with_theta(1e9);
        let a = compress(&data, &params).unwrap();
        assert!(a.matched_sequences() > 0);
        let bytes = a.to_bytes();
        for cut in [0, 10, 67, 68, 100, bytes.len() / 2, bytes.len() - 1] {
            assert!(decompress_bytes(&bytes[..cut]).is_err(), "cut at {cut}");
        }

        let mut shorter = a.clone();
        shorter.offsets.pop();
        let err = decompress_bytes(&shorter.to_bytes()).unwrap_err();
        assert!(err.to_string().contains("corrupt stream in offsets"), "{err}");

        let mut flipped = a.clone();
        flipped.predmd[3] = !flipped.predmd[3];
        assert!(decompress(&flipped).is_err());
    }
}
