//! Offline next-POI metrics: HR@K, NDCG@K with one relevant item per query,
//! and the distribution of great-circle errors of top-1 predictions.

mod metrics;
mod report;

pub use metrics::{error_distribution, hit_rate_at_k, ndcg_at_k, ErrorDistribution};
pub use report::{
    evaluate, mean_report, read_report, write_cdf_csv, write_report, CdfPoint, EvalReport,
    ReportFormat, CSV_HEADER, DEFAULT_CDF_POINTS, DEFAULT_KS, DEFAULT_PERCENTILES,
};

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::prompt::PromptFileRecord;
use crate::sid::SidRegistry;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cutoff K must be at least 1")]
    InvalidK,
    #[error("percentile {0} outside 1..=100")]
    InvalidPercentile(u32),
    #[error("no record resolves a predicted location")]
    NoResolvedRecords,
    #[error("prediction for {0} has an empty ranking")]
    EmptyRanking(String),
    #[error("prediction for {prompt_id} ranks {sid} twice")]
    DuplicatePrediction { prompt_id: String, sid: String },
    #[error("prompt {0} predicted more than once")]
    DuplicatePrompt(String),
    #[error("no gold label for prompt {0}")]
    MissingGold(String),
    #[error("cannot average reports: {0}")]
    Incompatible(String),
    #[error("malformed report {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Line format of a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPrediction {
    pub prompt_id: String,
    pub ranked: Vec<String>,
}

/// A ranked prediction joined with its gold label. `predicted_point` is the
/// location of the top-ranked id when it is registered.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub prompt_id: String,
    pub ranked_predictions: Vec<String>,
    pub gold_sid: String,
    pub gold_point: GeoPoint,
    pub predicted_point: Option<GeoPoint>,
}

impl PredictionRecord {
    pub fn new(
        prompt_id: String,
        ranked_predictions: Vec<String>,
        gold_sid: String,
        gold_point: GeoPoint,
        predicted_point: Option<GeoPoint>,
    ) -> Result<Self, EvalError> {
        if ranked_predictions.is_empty() {
            return Err(EvalError::EmptyRanking(prompt_id));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = ranked_predictions.iter().find(|s| !seen.insert(s.as_str())) {
            return Err(EvalError::DuplicatePrediction {
                sid: dup.clone(),
                prompt_id,
            });
        }
        Ok(Self {
            prompt_id,
            ranked_predictions,
            gold_sid,
            gold_point,
            predicted_point,
        })
    }

    /// 1-based position of the gold id in the ranking.
    pub fn rank(&self) -> Option<usize> {
        self.ranked_predictions
            .iter()
            .position(|s| *s == self.gold_sid)
            .map(|i| i + 1)
    }

    pub fn error_km(&self) -> Option<f64> {
        self.predicted_point
            .map(|p| p.distance_km(&self.gold_point))
    }
}

/// Joins predictions with the gold labels of a prompt file and resolves each
/// top-1 id through the registry. Output follows the prompt-id order.
pub fn join_predictions(
    predictions: Vec<RankedPrediction>,
    prompts: &[PromptFileRecord],
    registry: &SidRegistry,
) -> Result<Vec<PredictionRecord>, EvalError> {
    let gold: BTreeMap<&str, &PromptFileRecord> =
        prompts.iter().map(|p| (p.prompt_id.as_str(), p)).collect();
    let mut out = BTreeMap::new();
    for pred in predictions {
        let Some(g) = gold.get(pred.prompt_id.as_str()) else {
            return Err(EvalError::MissingGold(pred.prompt_id));
        };
        let point = pred
            .ranked
            .first()
            .and_then(|top| registry.grammar().parse_exact(top))
            .and_then(|sid| registry.location_of(&sid));
        let record = PredictionRecord::new(
            pred.prompt_id.clone(),
            pred.ranked,
            g.target_sid_surface.clone(),
            GeoPoint {
                lat: g.gt_lat,
                lng: g.gt_lng,
            },
            point,
        )?;
        if out.insert(pred.prompt_id.clone(), record).is_some() {
            return Err(EvalError::DuplicatePrompt(pred.prompt_id));
        }
    }
    Ok(out.into_values().collect())
}
