//! Last-value prediction and the per-segment sort used by the sorted
//! baseline and by the pattern matcher.

/// An array whose consecutive `segment_len`-sized spans are each sorted
/// ascending. The last span may be shorter.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedArray {
    values: Vec<f32>,
    segment_len: usize,
}

impl SegmentedArray {
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    pub fn segments(&self) -> std::slice::Chunks<'_, f32> {
        self.values.chunks(self.segment_len)
    }

    pub fn num_segments(&self) -> usize {
        self.values.len().div_ceil(self.segment_len)
    }
}

/// Sorts each span of `n` consecutive values independently.
///
/// # Panics
/// If `n == 0`.
pub fn segment_sort(values: &[f32], n: usize) -> SegmentedArray {
    assert!(n >= 1, "segment length must be at least 1");
    let mut out = values.to_vec();
    for seg in out.chunks_mut(n) {
        seg.sort_unstable_by(f32::total_cmp);
    }
    SegmentedArray {
        values: out,
        segment_len: n,
    }
}

/// Last-value prediction: the reconstructed value before `index`, or 0 at the start.
pub fn predict_last_value(history: &[f32], index: usize) -> f32 {
    match index {
        0 => 0.0,
        i => history[i - 1],
    }
}
