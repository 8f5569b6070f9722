//! Summary statistics over per-trial values.

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Nearest-rank quantile: the `⌈q·n⌉`-th smallest value (1-based), `q ∈ [0, 1]`.
/// Non-finite entries are ordered by `f64::total_cmp`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (q.clamp(0.0, 1.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.max(1) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub q16: f64,
    pub median: f64,
    pub q84: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        Self { mean: mean(xs), q16: quantile(xs, 0.16), median: quantile(xs, 0.5), q84: quantile(xs, 0.84) }
    }
}
