//! Check-in ingestion: parsing raw LBSN dumps, activity filtering,
//! time-gap segmentation and the temporal train/valid/test split.

mod filter;
mod manifest;
mod parse;
mod segment;
mod split;
mod stats;

pub use filter::{filter_min_activity, FilterMode};
pub use manifest::{
    manifest_records, read_catalog, read_checkins, read_manifest, split_from_manifest,
    write_catalog, write_checkins, write_manifest, ManifestRecord, SplitName,
};
pub use parse::{
    parse_checkin_file, parse_checkins, ColumnMap, DatasetFormat, ParseOutput, TimeFormat,
};
pub use segment::segment_trajectories;
pub use split::{temporal_split, DatasetSplit, SplitRatios};
pub use stats::{dataset_stats, DatasetStats};

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{GeoError, GeoPoint};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{malformed} of {total} lines malformed (first at line {first_line}): {reason}")]
    Format {
        malformed: usize,
        total: usize,
        first_line: usize,
        reason: String,
    },
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    InvalidRatios((f64, f64, f64)),
    #[error("manifest references unknown check-in index {0}")]
    UnknownCheckin(usize),
    #[error(transparent)]
    Jsonl(#[from] crate::jsonl::JsonlError),
}

/// One visit `(user, POI, category, time, coordinates)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckIn {
    /// Ordinal of the record among the well-formed records of its source file.
    pub index: usize,
    pub user_id: String,
    pub poi_id: String,
    pub category_id: String,
    pub category_name: String,
    pub lat: f64,
    pub lng: f64,
    pub utc_timestamp: i64,
    pub tz_offset_minutes: i32,
}

impl CheckIn {
    pub fn location(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lng: self.lng,
        }
    }

    /// Seconds since the epoch shifted into the check-in's local time zone.
    pub fn local_seconds(&self) -> i64 {
        self.utc_timestamp + self.tz_offset_minutes as i64 * 60
    }

    pub fn local_time(&self) -> NaiveDateTime {
        DateTime::from_timestamp(self.local_seconds(), 0)
            .map(|d| d.naive_utc())
            .unwrap_or_default()
    }
}

/// A user's check-ins with no gap above the segmentation threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub trajectory_id: String,
    pub user_id: String,
    pub checkins: Vec<CheckIn>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.checkins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkins.is_empty()
    }

    pub fn start_local(&self) -> i64 {
        self.checkins
            .first()
            .map(CheckIn::local_seconds)
            .unwrap_or(i64::MIN)
    }

    pub fn end_local(&self) -> i64 {
        self.checkins
            .last()
            .map(CheckIn::local_seconds)
            .unwrap_or(i64::MIN)
    }
}

/// Catalog row for one POI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub poi_id: String,
    pub category_id: String,
    pub category_name: String,
    pub lat: f64,
    pub lng: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
}

impl PoiRecord {
    pub fn from_checkin(c: &CheckIn) -> Self {
        Self {
            poi_id: c.poi_id.clone(),
            category_id: c.category_id.clone(),
            category_name: c.category_name.clone(),
            lat: c.lat,
            lng: c.lng,
            address: None,
        }
    }

    pub fn location(&self) -> Result<GeoPoint, GeoError> {
        GeoPoint::new(self.lat, self.lng)
    }
}
