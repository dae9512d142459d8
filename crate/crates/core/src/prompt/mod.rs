//! Prompt text for next-POI prediction: dated check-in lines with category,
//! street address, id surface and a transition-distance clause, grouped into
//! numbered history blocks followed by the current behavior sequence.

mod builder;
mod emit;
mod format;

pub use builder::{build_eval_prompt, build_prompt, PromptInputs};
pub use emit::{
    emit_alignment_pairs, emit_eval_prompts, emit_pretrain_examples, read_prompt_file,
    AlignmentDirection, AlignmentPair, PromptFileRecord,
};
pub use format::{format_checkin_line, format_datetime, ordinal_suffix, ADDRESS_PLACEHOLDER};

use std::collections::BTreeMap;

use chrono::{FixedOffset, NaiveDateTime, TimeZone};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::sid::SpatialSemanticId;

pub const DEFAULT_INSTRUCTION: &str = "Here is a record of a user's POI accesses, your task is based on the history to predict the POI that the user is likely to access at the specified time.";
pub const HISTORY_HEADER: &str = "Given user historical data:";
pub const CURRENT_HEADER: &str = "Given user behavior sequence:";

/// POI id → street address.
pub type AddressBook = BTreeMap<String, String>;

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("current trajectory has no context check-ins")]
    EmptyContext,
    #[error("poi {0} has no registered id")]
    UnregisteredPoi(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SerializationConfig {
    pub max_history_checkins_train: usize,
    pub max_history_checkins_eval: usize,
    pub include_addresses: bool,
    pub include_distances: bool,
    /// First line of the prompt; `None` starts directly with the history header.
    pub instruction: Option<String>,
}

impl Default for SerializationConfig {
    fn default() -> Self {
        Self {
            max_history_checkins_train: 50,
            max_history_checkins_eval: 300,
            include_addresses: true,
            include_distances: true,
            instruction: Some(DEFAULT_INSTRUCTION.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptRecord {
    pub prompt_id: String,
    pub user_id: String,
    pub prompt_text: String,
    pub ground_truth_sid: SpatialSemanticId,
    pub ground_truth_point: GeoPoint,
    pub target_local_time: NaiveDateTime,
    pub tz_offset_minutes: i32,
}

impl PromptRecord {
    /// Target time as RFC 3339 with the check-in's UTC offset.
    pub fn target_time_iso(&self) -> String {
        let offset = FixedOffset::east_opt(self.tz_offset_minutes * 60)
            .unwrap_or(FixedOffset::east_opt(0).unwrap());
        offset
            .from_local_datetime(&self.target_local_time)
            .single()
            .map(|t| t.to_rfc3339())
            .unwrap_or_else(|| {
                self.target_local_time
                    .format("%Y-%m-%dT%H:%M:%S")
                    .to_string()
            })
    }
}
