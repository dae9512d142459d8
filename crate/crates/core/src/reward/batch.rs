use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{composite_reward, group_advantages, RewardConfig};
use crate::geo::GeoPoint;
use crate::sid::{SidRegistry, SpatialSemanticId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutRecord {
    pub prompt_id: String,
    pub completion_index: u32,
    pub completion_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldLabel {
    pub sid: SpatialSemanticId,
    pub point: GeoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub prompt_id: String,
    pub completion_index: u32,
    pub r_fmt: f64,
    pub r_acc: f64,
    pub r_dist: f64,
    pub total: f64,
    pub advantage: f64,
    pub pred_sid: Option<String>,
    pub err_km: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreBatch {
    /// Sorted by `(prompt_id, completion_index)`.
    pub scores: Vec<ScoreRecord>,
    /// Rollouts whose prompt has no gold label.
    pub unmatched: usize,
}

/// Scores every rollout against its prompt's gold label and normalizes the
/// totals within each prompt group.
pub fn score_rollouts(
    rollouts: &[RolloutRecord],
    gold: &BTreeMap<String, GoldLabel>,
    registry: &SidRegistry,
    cfg: &RewardConfig,
) -> ScoreBatch {
    let mut groups: BTreeMap<&str, Vec<ScoreRecord>> = BTreeMap::new();
    let mut unmatched = 0;
    for r in rollouts {
        let Some(label) = gold.get(&r.prompt_id) else {
            unmatched += 1;
            continue;
        };
        let b = composite_reward(&r.completion_text, &label.sid, &label.point, registry, cfg);
        groups.entry(&r.prompt_id).or_default().push(ScoreRecord {
            prompt_id: r.prompt_id.clone(),
            completion_index: r.completion_index,
            r_fmt: b.r_fmt,
            r_acc: b.r_acc,
            r_dist: b.r_dist,
            total: b.total,
            advantage: 0.0,
            pred_sid: b.parsed_sid.map(|s| s.render()),
            err_km: b.haversine_error_km,
        });
    }
    let mut scores = Vec::with_capacity(rollouts.len());
    for (_, mut group) in groups {
        group.sort_by_key(|s| s.completion_index);
        let totals: Vec<f64> = group.iter().map(|s| s.total).collect();
        for (s, a) in group
            .iter_mut()
            .zip(group_advantages(&totals, cfg.advantage_epsilon))
        {
            s.advantage = a;
        }
        scores.extend(group);
    }
    ScoreBatch { scores, unmatched }
}
