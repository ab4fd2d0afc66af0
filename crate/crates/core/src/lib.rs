//! Error-bounded lossy compression for 1-D single-precision arrays.
//!
//! Three predictors share one pipeline (predict, quantize residuals,
//! Huffman-code the quantization codes, store unpredictable values
//! verbatim, optionally LZ77 the result):
//!
//! - [`Predictor::SzLv`]: last-value prediction in input order.
//! - [`Predictor::SzSort`]: last-value prediction after sorting every
//!   `n`-point segment.
//! - [`Predictor::SzPm`]: each sorted `n`-point sequence is predicted from the
//!   most similar (sorted, mean-shifted) window of the last `m`
//!   reconstructed values, falling back to last-value when nothing is
//!   within `theta`.
//!
//! The sorting predictors return the per-segment sorted permutation of the
//! input; element order inside a segment is not preserved.
//!
//! ```
//! use szpm::{compress, decompress, CompressionParams, FloatArray, Predictor};
//!
//! let data = FloatArray::new((0..4096).map(|i| (i as f32 * 0.01).sin()).collect()).unwrap();
//! let params = CompressionParams::default().with_predictor(Predictor::SzPm).with_n(8);
//! let artifact = compress(&data, &params).unwrap();
//! let bytes = artifact.to_bytes();
//! let restored = szpm::decompress_bytes(&bytes).unwrap();
//! assert_eq!(restored.len(), data.len());
//! # let _ = decompress(&artifact).unwrap();
//! ```

pub mod bits;
pub mod codec;
pub mod error;
pub mod format;
pub mod huffman;
pub mod lz77;
pub mod metrics;
pub mod params;
pub mod pm;
pub mod predict;
pub mod quantize;
pub mod synth;

pub use codec::{compress, compress_with_trace, decompress, decompress_bytes, CompressionTrace};
pub use error::{Result, Section, SzError};
pub use format::CompressedArtifact;
pub use metrics::{bit_accounting, code_histogram, verify_error_bound, CodeHistogram, SizeBreakdown};
pub use params::{
    resolve_error_bound, validate_params, CompressionParams, ErrorBound, ErrorBoundMode,
    FloatArray, Predictor, ValidatedParams,
};

/// Size breakdown of an artifact; same as [`metrics::bit_accounting`].
pub fn inspect(artifact: &CompressedArtifact) -> SizeBreakdown {
    bit_accounting(artifact)
}
