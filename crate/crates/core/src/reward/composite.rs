use serde::{Deserialize, Serialize};

use super::{distance_reward, format_reward, sid_accuracy_reward, RewardConfig};
use crate::geo::GeoPoint;
use crate::sid::{SidRegistry, SpatialSemanticId};

/// A parsed prediction; `point` is absent when the id is not registered.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub sid: SpatialSemanticId,
    pub point: Option<GeoPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_fmt: f64,
    pub r_acc: f64,
    pub r_dist: f64,
    pub total: f64,
    pub parsed_sid: Option<SpatialSemanticId>,
    pub haversine_error_km: Option<f64>,
}

/// Parses the first id run after the last `</think>`, or anywhere in the text
/// when there is no closing tag.
pub fn extract_prediction(completion: &str, registry: &SidRegistry) -> Option<Prediction> {
    let answer = match completion.rfind("</think>") {
        Some(at) => &completion[at + "</think>".len()..],
        None => completion,
    };
    let sid = registry.grammar().parse(answer).ok()?;
    let point = registry.location_of(&sid);
    Some(Prediction { sid, point })
}

pub fn composite_reward(
    completion: &str,
    gold_sid: &SpatialSemanticId,
    gold_point: &GeoPoint,
    registry: &SidRegistry,
    cfg: &RewardConfig,
) -> RewardBreakdown {
    let r_fmt = format_reward(completion, registry.grammar(), cfg.fmt_value);
    let prediction = extract_prediction(completion, registry);
    let (mut r_acc, mut r_dist, mut err) = (0.0, 0.0, None);
    if let Some(pred) = &prediction {
        r_acc = sid_accuracy_reward(&pred.sid, gold_sid, cfg).unwrap_or(0.0);
        if let Some(point) = pred.point {
            let d = point.distance_km(gold_point);
            r_dist = distance_reward(d, cfg).unwrap_or(cfg.r_min);
            err = Some(d);
        }
    }
    RewardBreakdown {
        r_fmt,
        r_acc,
        r_dist,
        total: r_fmt + cfg.alpha * r_acc + cfg.beta * r_dist,
        parsed_sid: prediction.map(|p| p.sid),
        haversine_error_km: err,
    }
}
