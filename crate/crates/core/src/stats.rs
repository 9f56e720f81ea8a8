//! Distribution summaries behind the boxplot figures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("cannot summarize an empty series")]
    Empty,
    #[error("series contains a non-finite value at index {0}")]
    NonFinite(usize),
}

/// Five-number summary plus moments. Quartiles interpolate linearly between
/// order statistics at rank `p·(n − 1)`; `stdev` uses the `n − 1`
/// denominator. Whiskers are the most extreme samples within 1.5·IQR of the
/// box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: f64,
    pub stdev: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

impl DistributionSummary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    /// True when some sample lies beyond the 1.5·IQR whiskers.
    pub fn has_outliers(&self) -> bool {
        self.whisker_low > self.min || self.whisker_high < self.max
    }
}

/// Quantile of already sorted data by linear interpolation.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = rank - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn summarize(series: &[f64]) -> Result<DistributionSummary, StatsError> {
    if series.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(i));
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // summing sorted values keeps the mean independent of input order
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let stdev = if n > 1 {
        let ss: f64 = sorted.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let fence = 1.5 * (q3 - q1);
    let whisker_low = *sorted.iter().find(|&&v| v >= q1 - fence).unwrap_or(&sorted[0]);
    let whisker_high = *sorted
        .iter()
        .rev()
        .find(|&&v| v <= q3 + fence)
        .unwrap_or(&sorted[n - 1]);
    Ok(DistributionSummary {
        n,
        mean,
        stdev,
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[n - 1],
        whisker_low,
        whisker_high,
    })
}

pub fn median(series: &[f64]) -> Result<f64, StatsError> {
    summarize(series).map(|s| s.median)
}

pub fn mean(series: &[f64]) -> Result<f64, StatsError> {
    if series.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(series.iter().sum::<f64>() / series.len() as f64)
}
