use super::{HierarchyWeights, RewardConfig, RewardError};
use crate::sid::SpatialSemanticId;

/// Weights of the cumulative geo-match indicators `I[g1]`, `I[g1∧g2]`, ….
///
/// With two geo tokens these are `(g1, g1g2)`. Other widths keep `g1` on the
/// first indicator and share `g1g2` equally over the remaining ones, so the
/// sequence stays non-increasing and the total is unchanged.
pub fn geo_level_weights(w: &HierarchyWeights, n: usize) -> Vec<f64> {
    spread(w.g1, w.g1g2, n)
}

/// Semantic counterpart of [`geo_level_weights`], built from `(s1, s1s2)`.
pub fn semantic_level_weights(w: &HierarchyWeights, n: usize) -> Vec<f64> {
    spread(w.s1, w.s1s2, n)
}

fn spread(first: f64, rest: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![first + rest],
        _ => std::iter::once(first)
            .chain(std::iter::repeat(rest / (n - 1) as f64).take(n - 1))
            .collect(),
    }
}

fn cumulative_score<T: PartialEq>(pred: &[T], gold: &[T], weights: &[f64]) -> f64 {
    pred.iter()
        .zip(gold)
        .zip(weights)
        .take_while(|((p, g), _)| p == g)
        .map(|(_, w)| w)
        .sum()
}

/// Hierarchy-weighted match score with an exactness bonus, capped at 1.
pub fn sid_accuracy_reward(
    pred: &SpatialSemanticId,
    gold: &SpatialSemanticId,
    cfg: &RewardConfig,
) -> Result<f64, RewardError> {
    if pred.geo.len() != gold.geo.len() || pred.semantic.len() != gold.semantic.len() {
        return Err(RewardError::ShapeMismatch(pred.render(), gold.render()));
    }
    let geo = cumulative_score(
        &pred.geo,
        &gold.geo,
        &geo_level_weights(&cfg.weights, gold.geo.len()),
    );
    let sem = cumulative_score(
        &pred.semantic,
        &gold.semantic,
        &semantic_level_weights(&cfg.weights, gold.semantic.len()),
    );
    let exact = if pred == gold { cfg.lambda_u } else { 0.0 };
    Ok((geo + sem + exact).min(1.0))
}
