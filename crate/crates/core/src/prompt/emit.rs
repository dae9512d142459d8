use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::builder::{build_prompt, PromptInputs};
use super::{PromptError, PromptRecord, ADDRESS_PLACEHOLDER};
use crate::ingest::{DatasetSplit, PoiRecord, Trajectory};
use crate::jsonl::{self, JsonlError};
use crate::sid::SidRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentDirection {
    TextToSid,
    SidToText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPair {
    pub poi_id: String,
    pub direction: AlignmentDirection,
    pub input: String,
    pub target: String,
}

/// Two records per registered POI: description → id surface and the reverse.
pub fn emit_alignment_pairs(registry: &SidRegistry, catalog: &[PoiRecord]) -> Vec<AlignmentPair> {
    let mut catalog: Vec<&PoiRecord> = catalog.iter().collect();
    catalog.sort_by(|a, b| a.poi_id.cmp(&b.poi_id));
    let mut out = Vec::with_capacity(2 * catalog.len());
    for poi in catalog {
        let Some(sid) = registry.sid_of(&poi.poi_id) else {
            continue;
        };
        let address = poi
            .address
            .as_deref()
            .filter(|a| !a.trim().is_empty())
            .unwrap_or(ADDRESS_PLACEHOLDER);
        let text = format!("Category: {}. Address: {}.", poi.category_name, address);
        let surface = sid.render();
        out.push(AlignmentPair {
            poi_id: poi.poi_id.clone(),
            direction: AlignmentDirection::TextToSid,
            input: text.clone(),
            target: surface.clone(),
        });
        out.push(AlignmentPair {
            poi_id: poi.poi_id.clone(),
            direction: AlignmentDirection::SidToText,
            input: surface,
            target: text,
        });
    }
    out
}

fn history_index(train: &[Trajectory]) -> HashMap<&str, Vec<&Trajectory>> {
    let mut by_user: HashMap<&str, Vec<&Trajectory>> = HashMap::new();
    for t in train.iter().filter(|t| !t.is_empty()) {
        by_user.entry(t.user_id.as_str()).or_default().push(t);
    }
    for trajs in by_user.values_mut() {
        trajs.sort_by_key(|t| (t.start_local(), t.trajectory_id.clone()));
    }
    by_user
}

/// The user's train trajectories that ended before `current` began.
fn prior<'t>(
    index: &HashMap<&str, Vec<&'t Trajectory>>,
    current: &Trajectory,
) -> Vec<&'t Trajectory> {
    index
        .get(current.user_id.as_str())
        .map(|ts| {
            ts.iter()
                .copied()
                .filter(|t| {
                    t.trajectory_id != current.trajectory_id
                        && t.end_local() < current.start_local()
                })
                .collect()
        })
        .unwrap_or_default()
}

/// One record per (context, next check-in) pair of every train trajectory,
/// rendered with the training history limit.
pub fn emit_pretrain_examples(
    split: &DatasetSplit,
    inputs: &PromptInputs<'_>,
) -> Result<Vec<PromptRecord>, PromptError> {
    let index = history_index(&split.train);
    let mut out = Vec::new();
    for traj in &split.train {
        let history = prior(&index, traj);
        for target in 1..traj.len() {
            out.push(build_prompt(
                &format!("{}:{}", traj.trajectory_id, target),
                &history,
                &traj.checkins[..target],
                &traj.checkins[target],
                inputs.config.max_history_checkins_train,
                inputs,
            )?);
        }
    }
    Ok(out)
}

/// One query per evaluation trajectory: every check-in but the last is
/// context, the last is the target. Trajectories shorter than two are skipped.
pub fn emit_eval_prompts(
    queries: &[Trajectory],
    train: &[Trajectory],
    inputs: &PromptInputs<'_>,
) -> Result<Vec<PromptRecord>, PromptError> {
    let index = history_index(train);
    queries
        .iter()
        .filter(|t| t.len() >= 2)
        .map(|t| {
            let (target, context) = t.checkins.split_last().expect("len >= 2");
            build_prompt(
                &t.trajectory_id,
                &prior(&index, t),
                context,
                target,
                inputs.config.max_history_checkins_eval,
                inputs,
            )
        })
        .collect()
}

/// Line format of prompt files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptFileRecord {
    pub prompt_id: String,
    pub user_id: String,
    pub prompt: String,
    pub target_sid_surface: String,
    pub gt_lat: f64,
    pub gt_lng: f64,
    pub target_time_iso: String,
}

impl From<&PromptRecord> for PromptFileRecord {
    fn from(r: &PromptRecord) -> Self {
        Self {
            prompt_id: r.prompt_id.clone(),
            user_id: r.user_id.clone(),
            prompt: r.prompt_text.clone(),
            target_sid_surface: r.ground_truth_sid.render(),
            gt_lat: r.ground_truth_point.lat,
            gt_lng: r.ground_truth_point.lng,
            target_time_iso: r.target_time_iso(),
        }
    }
}

pub fn read_prompt_file(path: &Path) -> Result<Vec<PromptFileRecord>, JsonlError> {
    jsonl::read_file(path)
}
