use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{IngestError, PoiRecord, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<Trajectory>,
    pub valid: Vec<Trajectory>,
    pub test: Vec<Trajectory>,
    pub poi_catalog: BTreeMap<String, PoiRecord>,
    /// Valid/test trajectories dropped for containing a user or POI absent from train.
    pub dropped_unseen: usize,
    /// Valid/test trajectories dropped for having no (context, target) pair.
    pub dropped_short: usize,
}

impl DatasetSplit {
    pub fn all(&self) -> impl Iterator<Item = &Trajectory> {
        self.train.iter().chain(&self.valid).chain(&self.test)
    }

    /// Catalog built from the first occurrence of each POI in the train split.
    pub fn rebuild_catalog(&mut self) {
        self.poi_catalog.clear();
        for c in self.train.iter().flat_map(|t| &t.checkins) {
            self.poi_catalog
                .entry(c.poi_id.clone())
                .or_insert_with(|| PoiRecord::from_checkin(c));
        }
    }
}

/// Orders trajectories by end time (ties by user, then trajectory id), puts
/// the first `ratios.train` share in train and the next `ratios.valid` share
/// in valid. Valid/test trajectories touching a user or POI unseen in train,
/// or shorter than two check-ins, are dropped.
pub fn temporal_split(
    mut trajectories: Vec<Trajectory>,
    ratios: SplitRatios,
) -> Result<DatasetSplit, IngestError> {
    let SplitRatios { train, valid, test } = ratios;
    if [train, valid, test].iter().any(|r| !(*r >= 0.0))
        || ((train + valid + test) - 1.0).abs() > 1e-9
    {
        return Err(IngestError::InvalidRatios((train, valid, test)));
    }
    trajectories.retain(|t| !t.is_empty());
    trajectories.sort_by(|a, b| {
        (a.end_local(), &a.user_id, &a.trajectory_id).cmp(&(
            b.end_local(),
            &b.user_id,
            &b.trajectory_id,
        ))
    });
    let n = trajectories.len();
    let n_train = ((n as f64 * train) + 1e-9).floor() as usize;
    let n_valid = (((n as f64 * valid) + 1e-9).floor() as usize).min(n - n_train);

    let mut rest = trajectories.split_off(n_train);
    let test_part = rest.split_off(n_valid);
    let mut split = DatasetSplit {
        train: trajectories,
        ..Default::default()
    };

    let users: HashSet<&str> = split.train.iter().map(|t| t.user_id.as_str()).collect();
    let pois: HashSet<&str> = split
        .train
        .iter()
        .flat_map(|t| &t.checkins)
        .map(|c| c.poi_id.as_str())
        .collect();
    let keep = |part: Vec<Trajectory>, dropped_unseen: &mut usize, dropped_short: &mut usize| {
        part.into_iter()
            .filter(|t| {
                if !users.contains(t.user_id.as_str())
                    || t.checkins.iter().any(|c| !pois.contains(c.poi_id.as_str()))
                {
                    *dropped_unseen += 1;
                    false
                } else if t.len() < 2 {
                    *dropped_short += 1;
                    false
                } else {
                    true
                }
            })
            .collect::<Vec<_>>()
    };
    let (mut unseen, mut short) = (0, 0);
    let valid_part = keep(rest, &mut unseen, &mut short);
    let test_part = keep(test_part, &mut unseen, &mut short);
    split.valid = valid_part;
    split.test = test_part;
    split.dropped_unseen = unseen;
    split.dropped_short = short;
    split.rebuild_catalog();
    Ok(split)
}
