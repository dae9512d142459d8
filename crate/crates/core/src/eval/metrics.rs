use std::collections::BTreeMap;

use super::{EvalError, PredictionRecord};

fn mean_over(
    records: &[PredictionRecord],
    k: usize,
    gain: impl Fn(usize) -> f64,
) -> Result<f64, EvalError> {
    if k < 1 {
        return Err(EvalError::InvalidK);
    }
    if records.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = records
        .iter()
        .filter_map(|r| r.rank())
        .filter(|&rank| rank <= k)
        .map(gain)
        .fold(0.0, |a, b| a + b);
    Ok(total / records.len() as f64)
}

/// Fraction of queries whose gold id is in the top `k`.
pub fn hit_rate_at_k(records: &[PredictionRecord], k: usize) -> Result<f64, EvalError> {
    mean_over(records, k, |_| 1.0)
}

/// NDCG with a single relevant item, so the ideal DCG is 1.
pub fn ndcg_at_k(records: &[PredictionRecord], k: usize) -> Result<f64, EvalError> {
    mean_over(records, k, |rank| 1.0 / (1.0 + rank as f64).log2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDistribution {
    pub percentiles: BTreeMap<u32, f64>,
    /// `(distance_km, cumulative_fraction)` at equally spaced distances from 0 to the largest error.
    pub cdf: Vec<(f64, f64)>,
    pub n_resolved: usize,
    pub n_unresolved: usize,
}

/// Nearest-rank percentile of an ascending slice.
fn nearest_rank(sorted: &[f64], p: u32) -> f64 {
    let rank = ((p as f64 / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Percentiles and CDF of top-1 errors. Unresolved records are left out of
/// the percentiles but stay in the CDF denominator, so the curve only reaches
/// 1 when every prediction has coordinates.
pub fn error_distribution(
    records: &[PredictionRecord],
    percentiles: &[u32],
    cdf_points: usize,
) -> Result<ErrorDistribution, EvalError> {
    if let Some(&p) = percentiles.iter().find(|&&p| !(1..=100).contains(&p)) {
        return Err(EvalError::InvalidPercentile(p));
    }
    let mut errors: Vec<f64> = records
        .iter()
        .filter_map(PredictionRecord::error_km)
        .collect();
    if errors.is_empty() {
        return Err(EvalError::NoResolvedRecords);
    }
    errors.sort_by(f64::total_cmp);
    let n_total = records.len() as f64;
    let max = *errors.last().expect("non-empty");
    let cdf = (0..cdf_points)
        .map(|i| {
            let x = if cdf_points > 1 {
                max * i as f64 / (cdf_points - 1) as f64
            } else {
                max
            };
            let x = if i + 1 == cdf_points { max } else { x };
            let below = errors.partition_point(|&e| e <= x);
            (x, below as f64 / n_total)
        })
        .collect();
    Ok(ErrorDistribution {
        percentiles: percentiles
            .iter()
            .map(|&p| (p, nearest_rank(&errors, p)))
            .collect(),
        cdf,
        n_resolved: errors.len(),
        n_unresolved: records.len() - errors.len(),
    })
}
