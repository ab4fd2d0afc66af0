//! Browser bindings for the demo page in `www/`.
//!
//! Results cross the boundary as JSON strings; the page parses them.

use serde::Serialize;
use szpm::metrics::ComparisonRow;
use szpm::synth::{generate as synth, Generator, SyntheticSpec};
use szpm::{bit_accounting, code_histogram, compress, CompressionParams, ErrorBound, FloatArray, Predictor};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Report {
    breakdown: szpm::SizeBreakdown,
    /// Counts for codes `center - radius ..= center + radius`.
    histogram: Vec<u64>,
    radius: usize,
    center_mass: f64,
}

#[derive(Serialize)]
struct SweepPoint {
    theta: f64,
    pm_ratio: f64,
    quant_codes: f64,
    overall: f64,
}

fn params(predictor: &str, n: usize, eb_rel: f64, theta: Option<f64>) -> Result<CompressionParams, String> {
    let predictor: Predictor = predictor.parse().map_err(|e: szpm::SzError| e.to_string())?;
    let mut p = CompressionParams::default()
        .with_predictor(predictor)
        .with_n(n)
        .with_error_bound(ErrorBound::relative(eb_rel));
    if let Some(t) = theta {
        p = p.with_theta(t);
    }
    Ok(p)
}

fn array(values: &[f32]) -> Result<FloatArray, String> {
    FloatArray::new(values.to_vec()).map_err(|e| e.to_string())
}

pub fn generate_values(kind: &str, count: usize, seed: u64) -> Result<Vec<f32>, String> {
    let generator = match kind {
        "gaussian" => Generator::gaussian(),
        "mixture" => Generator::mixture(),
        "planted" => Generator::planted(),
        other => return Err(format!("unknown generator '{other}'")),
    };
    synth(&SyntheticSpec::new(count, generator, seed)).map_err(|e| e.to_string())
}

/// Breakdown plus the central part of the code histogram.
pub fn report_json(
    values: &[f32],
    predictor: &str,
    n: usize,
    eb_rel: f64,
    theta: Option<f64>,
    radius: usize,
) -> Result<String, String> {
    let a = compress(&array(values)?, &params(predictor, n, eb_rel, theta)?).map_err(|e| e.to_string())?;
    let h = code_histogram(&a).map_err(|e| e.to_string())?;
    let c = h.center;
    let radius = radius.min(c);
    let report = Report {
        breakdown: bit_accounting(&a),
        histogram: h.counts[c - radius..=c + radius].to_vec(),
        radius,
        center_mass: h.center_mass(),
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

pub fn sweep_json(values: &[f32], n: usize, eb_rel: f64, thetas: &[f64]) -> Result<String, String> {
    let data = array(values)?;
    let mut points = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let a = compress(&data, &params("sz-pm", n, eb_rel, Some(theta))?).map_err(|e| e.to_string())?;
        let b = bit_accounting(&a);
        points.push(SweepPoint {
            theta,
            pm_ratio: b.pm_ratio,
            quant_codes: b.quant_codes,
            overall: b.overall,
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

/// SZ vs SZ-PM at n = 8, 16, 32.
pub fn compare_json(values: &[f32], eb_rel: f64) -> Result<String, String> {
    let data = array(values)?;
    let mut rows = Vec::new();
    for n in [8, 16, 32] {
        for (label, predictor) in [("sz", "sz-sort"), ("sz-pm", "sz-pm")] {
            let a = compress(&data, &params(predictor, n, eb_rel, None)?).map_err(|e| e.to_string())?;
            rows.push(ComparisonRow {
                label: format!("{label}({n})"),
                breakdown: bit_accounting(&a),
            });
        }
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn generate(kind: &str, count: u32, seed: u32) -> Result<Vec<f32>, JsError> {
    generate_values(kind, count as usize, u64::from(seed)).map_err(|e| JsError::new(&e))
}

/// `theta` < 0 or NaN selects the default threshold.
#[wasm_bindgen]
pub fn compress_report(
    values: &[f32],
    predictor: &str,
    n: u32,
    eb_rel: f64,
    theta: f64,
    radius: u32,
) -> Result<String, JsError> {
    let theta = (theta >= 0.0).then_some(theta);
    report_json(values, predictor, n as usize, eb_rel, theta, radius as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn theta_sweep(values: &[f32], n: u32, eb_rel: f64, thetas: &[f64]) -> Result<String, JsError> {
    sweep_json(values, n as usize, eb_rel, thetas).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compare_table(values: &[f32], eb_rel: f64) -> Result<String, JsError> {
    compare_json(values, eb_rel).map_err(|e| JsError::new(&e))
}
