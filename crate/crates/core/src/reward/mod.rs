//! Rollout rewards: a log-distance spatial reward, a hierarchy-weighted id
//! match reward with an exactness bonus, a trace format reward, and
//! group-relative advantages.
//!
//! `total = r_fmt + alpha * r_acc + beta * r_dist`

mod accuracy;
mod advantage;
mod batch;
mod composite;
mod distance;
mod format;

pub use accuracy::{geo_level_weights, semantic_level_weights, sid_accuracy_reward};
pub use advantage::{advantage_stats, group_advantages};
pub use batch::{score_rollouts, GoldLabel, RolloutRecord, ScoreBatch, ScoreRecord};
pub use composite::{composite_reward, extract_prediction, Prediction, RewardBreakdown};
pub use distance::distance_reward;
pub use format::{format_reward, is_valid_trace};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("distance must be a non-negative number, got {0}")]
    InvalidDistance(f64),
    #[error("ids have different shapes: {0} vs {1}")]
    ShapeMismatch(String, String),
    #[error("invalid reward config: {0}")]
    Config(String),
}

/// Weights of the cumulative match indicators for the default two geo and two semantic tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HierarchyWeights {
    pub g1: f64,
    pub g1g2: f64,
    pub s1: f64,
    pub s1s2: f64,
}

impl Default for HierarchyWeights {
    fn default() -> Self {
        Self {
            g1: 0.3,
            g1g2: 0.2,
            s1: 0.25,
            s1s2: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub alpha: f64,
    pub beta: f64,
    pub lambda_u: f64,
    pub d_near_km: f64,
    pub d_far_km: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub weights: HierarchyWeights,
    pub fmt_value: f64,
    pub advantage_epsilon: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 1.0,
            lambda_u: 0.1,
            d_near_km: 0.1,
            d_far_km: 3.0,
            r_min: 0.0,
            r_max: 1.0,
            weights: HierarchyWeights::default(),
            fmt_value: 2.0,
            advantage_epsilon: 1e-6,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardError> {
        let w = &self.weights;
        let err = |m: &str| Err(RewardError::Config(m.to_string()));
        if !(self.d_near_km >= 0.0 && self.d_near_km < self.d_far_km) {
            return err("need 0 <= d_near_km < d_far_km");
        }
        if !(self.r_min < self.r_max) {
            return err("need r_min < r_max");
        }
        if [w.g1, w.g1g2, w.s1, w.s1s2, self.lambda_u]
            .iter()
            .any(|x| !(*x >= 0.0))
        {
            return err("hierarchy weights and lambda_u must be non-negative");
        }
        if w.g1 + w.g1g2 + w.s1 + w.s1s2 + self.lambda_u > 1.0 + 1e-12 {
            return err("hierarchy weights plus lambda_u exceed 1");
        }
        if !(self.advantage_epsilon > 0.0) {
            return err("advantage_epsilon must be positive");
        }
        Ok(())
    }

    /// Slope of the clipped log-distance ramp.
    pub fn kappa(&self) -> f64 {
        (self.r_min - self.r_max) / (self.d_far_km.ln_1p() - self.d_near_km.ln_1p())
    }
}
