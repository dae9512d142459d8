//! Stage files: split manifest, POI catalog and normalized check-ins.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CheckIn, DatasetSplit, IngestError, PoiRecord, Trajectory};
use crate::jsonl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitName {
    Train,
    Valid,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub trajectory_id: String,
    pub user_id: String,
    pub split: SplitName,
    /// Values of [`CheckIn::index`] in trajectory order.
    pub checkin_indices: Vec<usize>,
}

pub fn manifest_records(split: &DatasetSplit) -> Vec<ManifestRecord> {
    let parts = [
        (SplitName::Train, &split.train),
        (SplitName::Valid, &split.valid),
        (SplitName::Test, &split.test),
    ];
    parts
        .into_iter()
        .flat_map(|(name, trajs)| {
            trajs.iter().map(move |t| ManifestRecord {
                trajectory_id: t.trajectory_id.clone(),
                user_id: t.user_id.clone(),
                split: name,
                checkin_indices: t.checkins.iter().map(|c| c.index).collect(),
            })
        })
        .collect()
}

pub fn write_manifest(path: &Path, split: &DatasetSplit) -> Result<(), IngestError> {
    Ok(jsonl::write_file(path, manifest_records(split))?)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>, IngestError> {
    Ok(jsonl::read_file(path)?)
}

pub fn write_catalog(path: &Path, split: &DatasetSplit) -> Result<(), IngestError> {
    Ok(jsonl::write_file(path, split.poi_catalog.values())?)
}

pub fn read_catalog(path: &Path) -> Result<Vec<PoiRecord>, IngestError> {
    Ok(jsonl::read_file(path)?)
}

/// Writes every check-in referenced by the split, ordered by index.
pub fn write_checkins(path: &Path, split: &DatasetSplit) -> Result<(), IngestError> {
    let mut all: Vec<&CheckIn> = split.all().flat_map(|t| &t.checkins).collect();
    all.sort_by_key(|c| c.index);
    Ok(jsonl::write_file(path, all)?)
}

pub fn read_checkins(path: &Path) -> Result<Vec<CheckIn>, IngestError> {
    Ok(jsonl::read_file(path)?)
}

/// Rebuilds a split from manifest records and the check-in table.
pub fn split_from_manifest(
    records: &[ManifestRecord],
    checkins: &[CheckIn],
) -> Result<DatasetSplit, IngestError> {
    let by_index: HashMap<usize, &CheckIn> = checkins.iter().map(|c| (c.index, c)).collect();
    let mut split = DatasetSplit::default();
    for r in records {
        let checkins = r
            .checkin_indices
            .iter()
            .map(|i| {
                by_index
                    .get(i)
                    .map(|c| (*c).clone())
                    .ok_or(IngestError::UnknownCheckin(*i))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let t = Trajectory {
            trajectory_id: r.trajectory_id.clone(),
            user_id: r.user_id.clone(),
            checkins,
        };
        match r.split {
            SplitName::Train => split.train.push(t),
            SplitName::Valid => split.valid.push(t),
            SplitName::Test => split.test.push(t),
        }
    }
    split.rebuild_catalog();
    Ok(split)
}
