//! Straightforward reference implementations the optimized code is checked against.

#![allow(dead_code)]

use rand::Rng;
use szpm::lz77::Lz77Token;
use szpm::quantize::Quantized;

/// Exhaustive LZ77: tries every distance and extends each match byte by byte.
pub fn brute_lz77(input: &[u8], search_cap: usize, lookahead_cap: usize) -> Vec<Lz77Token> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < input.len() {
        let max_len = (lookahead_cap - 1).min(input.len() - pos - 1);
        let (mut best_len, mut best_dist) = (0, 0);
        for dist in 1..=search_cap.min(pos) {
            let mut len = 0;
            while len < max_len && input[pos - dist + len] == input[pos + len] {
                len += 1;
            }
            if len > best_len {
                best_len = len;
                best_dist = dist;
            }
        }
        tokens.push(Lz77Token {
            offset: if best_len == 0 { 0 } else { best_dist },
            length: best_len,
            next: input[pos + best_len],
        });
        pos += best_len + 1;
    }
    tokens
}

/// Minimal total encoded length over all prefix codes, by enumeration of
/// length vectors satisfying Kraft. Frequencies must be non-zero; at most 8
/// symbols. Only lengths that are non-decreasing against descending
/// frequency are tried, since swapping any other assignment cannot hurt.
pub fn optimal_prefix_bits(freqs: &[u64]) -> u64 {
    assert!(!freqs.is_empty() && freqs.len() <= 8);
    if freqs.len() == 1 {
        // a lone symbol still costs one bit per occurrence
        return freqs[0];
    }
    let mut f = freqs.to_vec();
    f.sort_unstable_by(|a, b| b.cmp(a));
    let max_len = f.len() as u32 - 1;
    let mut best = u64::MAX;
    enumerate(&f, 0, 1, 0, 0.0, max_len, &mut best);
    best
}

fn enumerate(f: &[u64], i: usize, min_len: u32, cost: u64, kraft: f64, max_len: u32, best: &mut u64) {
    if i == f.len() {
        *best = (*best).min(cost);
        return;
    }
    for l in min_len..=max_len {
        let k = kraft + 0.5f64.powi(l as i32);
        if k <= 1.0 {
            enumerate(f, i + 1, l, cost + f[i] * u64::from(l), k, max_len, best);
        }
    }
}

/// Best window by scoring every candidate with the plain Lp formula.
/// Returns `(offset, distance, matched)`; `None` if the search buffer is too short.
pub fn brute_match(search: &[f32], lookahead: &[f32], p: f64, theta: f64) -> Option<(usize, f64, bool)> {
    let n = lookahead.len();
    if n == 0 || search.len() < n {
        return None;
    }
    let target = shifted(lookahead);
    let mut best: Option<(usize, f64)> = None;
    for off in 0..=search.len() - n {
        let cand = shifted(&search[off..off + n]);
        let sum: f64 = cand.iter().zip(&target).map(|(a, b)| (a - b).abs().powf(p)).sum();
        let d = sum.powf(1.0 / p);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((off, d));
        }
    }
    best.map(|(off, d)| (off, d, d < theta))
}

fn shifted(v: &[f32]) -> Vec<f64> {
    let mut s: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
    s.sort_by(f64::total_cmp);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    s.iter().map(|x| x - mean).collect()
}

/// Quantization by the textbook rule, written without the library.
pub fn reference_quantize(real: f32, predicted: f64, eb: f64, intervals: u32) -> (Quantized, f32) {
    let center = i64::from(intervals / 2);
    let r = (f64::from(real) - predicted) / (2.0 * eb);
    let steps = r.signum() * (r.abs() + 0.5).floor();
    if steps.abs() > center as f64 {
        return (Quantized::Unpredictable, real);
    }
    let recon = (predicted + steps * 2.0 * eb) as f32;
    if (f64::from(recon) - f64::from(real)).abs() > eb {
        return (Quantized::Unpredictable, real);
    }
    (Quantized::Code((center + steps as i64) as u16), recon)
}

pub fn min_max(v: &[f32]) -> (f32, f32) {
    let mut lo = f32::INFINITY;
    let mut hi = f32::NEG_INFINITY;
    for &x in v {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    (lo, hi)
}

/// Codes with a two-sided geometric shape around `center`.
pub fn laplace_codes(rng: &mut impl Rng, count: usize, center: u16, decay: f64, max_dev: u16) -> Vec<u16> {
    (0..count)
        .map(|_| {
            let mut dev = 0u16;
            while dev < max_dev && rng.random::<f64>() < decay {
                dev += 1;
            }
            if rng.random::<bool>() {
                center + dev
            } else {
                center - dev
            }
        })
        .collect()
}

/// Empirical entropy in bits per symbol, computed independently of the library.
pub fn entropy(codes: &[u16]) -> f64 {
    let mut counts = std::collections::HashMap::new();
    for &c in codes {
        *counts.entry(c).or_insert(0u64) += 1;
    }
    let n = codes.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}
