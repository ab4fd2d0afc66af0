//! Pattern-matching prediction.
//!
//! The reconstructed history acts as a search buffer of the last `m`
//! values and the next `n` input values form the look-ahead buffer. Every
//! length-`n` window of the search buffer is sorted and shifted by its mean,
//! as is the look-ahead sequence; the window with the smallest Lp distance
//! wins, and counts as a match when that distance is below `theta`. A
//! matched sequence is predicted as the winner's shifted values plus the
//! look-ahead mean, so only the window offset and the mean need storing.
//! Unmatched sequences fall back to last-value prediction.

use std::collections::VecDeque;

use crate::error::{Result, SzError};
use crate::params::ValidatedParams;

/// A sorted sequence with its mean subtracted.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedSequence {
    values: Vec<f64>,
    mean: f64,
}

impl ShiftedSequence {
    pub fn from_values(values: &[f32]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f32::total_cmp);
        let mean = if sorted.is_empty() {
            0.0
        } else {
            sorted.iter().map(|&v| f64::from(v)).sum::<f64>() / sorted.len() as f64
        };
        Self {
            values: sorted.iter().map(|&v| f64::from(v) - mean).collect(),
            mean,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `(sum |d|^p)^(1/p)` with fast paths for the common exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpMetric {
    p: f64,
    kind: LpKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LpKind {
    Half,
    One,
    Two,
    General,
}

impl LpMetric {
    pub fn new(p: f64) -> Self {
        let kind = if p == 0.5 {
            LpKind::Half
        } else if p == 1.0 {
            LpKind::One
        } else if p == 2.0 {
            LpKind::Two
        } else {
            LpKind::General
        };
        Self { p, kind }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    fn term(&self, d: f64) -> f64 {
        let a = d.abs();
        match self.kind {
            LpKind::Half => a.sqrt(),
            LpKind::One => a,
            LpKind::Two => a * a,
            LpKind::General => a.powf(self.p),
        }
    }

    #[inline]
    fn finish(&self, sum: f64) -> f64 {
        match self.kind {
            LpKind::Half => sum * sum,
            LpKind::One => sum,
            LpKind::Two => sum.sqrt(),
            LpKind::General => sum.powf(1.0 / self.p),
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.finish(a.iter().zip(b).map(|(x, y)| self.term(x - y)).sum())
    }

    /// Sum of terms, abandoning (returning `None`) once it exceeds `limit`.
    #[inline]
    fn bounded_sum(&self, a: &[f64], b: &[f64], limit: f64) -> Option<f64> {
        match self.kind {
            LpKind::Half => bounded(a, b, limit, |d| d.abs().sqrt()),
            LpKind::One => bounded(a, b, limit, f64::abs),
            LpKind::Two => bounded(a, b, limit, |d| d * d),
            LpKind::General => bounded(a, b, limit, |d| d.abs().powf(self.p)),
        }
    }
}

// Checked every four terms; the sum only grows, so the outcome is the same
// as checking after every term.
#[inline(always)]
fn bounded(a: &[f64], b: &[f64], limit: f64, term: impl Fn(f64) -> f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        // terms first so they can be computed side by side, then summed in order
        let t = [term(x[0] - y[0]), term(x[1] - y[1]), term(x[2] - y[2]), term(x[3] - y[3])];
        sum += t[0];
        sum += t[1];
        sum += t[2];
        sum += t[3];
        if sum > limit {
            return None;
        }
    }
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        sum += term(x - y);
    }
    if sum > limit {
        return None;
    }
    Some(sum)
}

pub fn lp_distance(a: &ShiftedSequence, b: &ShiftedSequence, p: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(SzError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(SzError::invalid("p must be positive"));
    }
    Ok(LpMetric::new(p).distance(&a.values, &b.values))
}

/// Search buffer (reconstructed values, oldest first) and look-ahead buffer.
#[derive(Debug, Clone, Copy)]
pub struct SlidingWindow<'a> {
    pub search: &'a [f32],
    pub lookahead: &'a [f32],
}

impl<'a> SlidingWindow<'a> {
    /// Window for a sequence starting at `start`, given the full
    /// reconstructed history (at least `start` values).
    pub fn at(history: &'a [f32], lookahead: &'a [f32], start: usize, m: usize) -> Self {
        Self {
            search: &history[start.saturating_sub(m)..start],
            lookahead,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub matched: bool,
    /// Start of the best window within the search buffer.
    pub offset: usize,
    pub distance: f64,
}

impl MatchResult {
    pub fn none() -> Self {
        Self {
            matched: false,
            offset: 0,
            distance: f64::INFINITY,
        }
    }
}

fn select_best<'a>(
    candidates: impl Iterator<Item = &'a ShiftedSequence>,
    target: &ShiftedSequence,
    metric: LpMetric,
    theta: f64,
) -> MatchResult {
    let mut best = MatchResult::none();
    let mut best_sum = f64::INFINITY;
    for (offset, cand) in candidates.enumerate() {
        // Sums grow monotonically, so a candidate already past the best sum
        // can only tie or lose, and ties go to the earlier offset.
        let Some(sum) = metric.bounded_sum(&cand.values, &target.values, best_sum) else {
            continue;
        };
        let distance = metric.finish(sum);
        if distance < best.distance {
            best = MatchResult {
                matched: false,
                offset,
                distance,
            };
            best_sum = sum;
        }
    }
    best.matched = best.distance < theta;
    best
}

/// Scores every length-`n` window of the search buffer against the
/// look-ahead sequence. Needs at least `n` search values; otherwise returns
/// an unmatched result with infinite distance.
pub fn find_best_match(window: &SlidingWindow<'_>, params: &ValidatedParams) -> MatchResult {
    let n = window.lookahead.len();
    if n == 0 || window.search.len() < n {
        return MatchResult::none();
    }
    let target = ShiftedSequence::from_values(window.lookahead);
    let candidates: Vec<ShiftedSequence> = window
        .search
        .windows(n)
        .map(ShiftedSequence::from_values)
        .collect();
    select_best(candidates.iter(), &target, LpMetric::new(params.p), params.theta)
}

/// Side information for one look-ahead sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PmRecord {
    /// predmd bit 0.
    Matched { offset: u32, mean: f32 },
    /// predmd bit 1.
    Fallback,
}

impl PmRecord {
    pub fn predmd_bit(&self) -> bool {
        matches!(self, PmRecord::Fallback)
    }
}

/// How the values of one sequence are predicted.
#[derive(Debug, Clone, PartialEq)]
pub enum SequencePrediction {
    /// Fixed predictions, one per sorted look-ahead position.
    Pattern {
        predictions: Vec<f64>,
        offset: u32,
        mean: f32,
    },
    /// Last-value prediction seeded with the previous reconstructed value.
    LastValue { seed: f32 },
}

impl SequencePrediction {
    pub fn record(&self) -> PmRecord {
        match *self {
            SequencePrediction::Pattern { offset, mean, .. } => PmRecord::Matched { offset, mean },
            SequencePrediction::LastValue { .. } => PmRecord::Fallback,
        }
    }

    /// Prediction for position `i`, given the reconstructed values of
    /// positions `0..i` of the same sequence.
    #[inline]
    pub fn predict(&self, i: usize, reconstructed: &[f32]) -> f64 {
        match self {
            SequencePrediction::Pattern { predictions, .. } => predictions[i],
            SequencePrediction::LastValue { seed } => {
                f64::from(if i == 0 { *seed } else { reconstructed[i - 1] })
            }
        }
    }
}

/// Predictions from the matched window: its shifted values plus the
/// look-ahead mean, rounded to f32 first since that is what gets stored.
pub fn pm_predict(window: &SlidingWindow<'_>, m: &MatchResult) -> Result<SequencePrediction> {
    if !m.matched {
        return Err(SzError::Unmatched);
    }
    let n = window.lookahead.len();
    let mean = ShiftedSequence::from_values(window.lookahead).mean() as f32;
    let cand = window
        .search
        .get(m.offset..m.offset + n)
        .ok_or_else(|| SzError::invalid("match offset outside search buffer"))?;
    Ok(pattern_prediction(cand, m.offset as u32, mean))
}

pub(crate) fn pattern_prediction(candidate: &[f32], offset: u32, mean: f32) -> SequencePrediction {
    shifted_prediction(&ShiftedSequence::from_values(candidate), offset, mean)
}

fn shifted_prediction(cand: &ShiftedSequence, offset: u32, mean: f32) -> SequencePrediction {
    let mean64 = f64::from(mean);
    SequencePrediction::Pattern {
        predictions: cand.values.iter().map(|&x| x + mean64).collect(),
        offset,
        mean,
    }
}

/// Last-value fallback, seeded with the newest search value (0 if none).
pub fn pm_fallback_predict(window: &SlidingWindow<'_>) -> SequencePrediction {
    SequencePrediction::LastValue {
        seed: window.search.last().copied().unwrap_or(0.0),
    }
}

/// Incremental matcher for the compressor: shifted candidate windows are
/// computed once and reused while they stay inside the search buffer.
#[derive(Debug, Clone)]
pub struct PatternMatcher {
    m: usize,
    n: usize,
    theta: f64,
    metric: LpMetric,
    cache: VecDeque<ShiftedSequence>,
    /// Absolute start index of `cache[0]`.
    cache_start: usize,
}

impl PatternMatcher {
    pub fn new(params: &ValidatedParams) -> Self {
        Self {
            m: params.m,
            n: params.n,
            theta: params.theta,
            metric: LpMetric::new(params.p),
            cache: VecDeque::new(),
            cache_start: 0,
        }
    }

    /// Matches `lookahead` against the search buffer ending at
    /// `history.len()`. `history` must only ever grow between calls.
    pub fn find(&mut self, history: &[f32], lookahead: &[f32]) -> MatchResult {
        let n = self.n;
        let start = history.len();
        let lowest = start.saturating_sub(self.m);
        if lookahead.len() != n || start - lowest < n {
            return MatchResult::none();
        }
        while self.cache_start < lowest && !self.cache.is_empty() {
            self.cache.pop_front();
            self.cache_start += 1;
        }
        if self.cache.is_empty() {
            self.cache_start = lowest;
        }
        let mut next = self.cache_start + self.cache.len();
        while next + n <= start {
            self.cache
                .push_back(ShiftedSequence::from_values(&history[next..next + n]));
            next += 1;
        }
        if self.theta == 0.0 {
            // Nothing is closer than zero.
            return MatchResult::none();
        }
        let target = ShiftedSequence::from_values(lookahead);
        select_best(self.cache.iter(), &target, self.metric, self.theta)
    }

    /// Prediction for `lookahead` given a match from [`PatternMatcher::find`]
    /// on the same history.
    pub fn predict(&self, lookahead: &[f32], m: &MatchResult) -> SequencePrediction {
        let mean = ShiftedSequence::from_values(lookahead).mean() as f32;
        shifted_prediction(&self.cache[m.offset], m.offset as u32, mean)
    }
}
