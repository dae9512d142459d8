use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::CheckIn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Drop sparse POIs once, then sparse users once.
    #[default]
    SinglePass,
    /// Repeat until no POI or user falls below the threshold.
    Fixpoint,
}

fn counts<'a>(
    checkins: &'a [CheckIn],
    key: impl Fn(&'a CheckIn) -> &'a str,
) -> HashMap<&'a str, usize> {
    let mut out = HashMap::new();
    for c in checkins {
        *out.entry(key(c)).or_default() += 1;
    }
    out
}

fn one_pass(checkins: &[CheckIn], min_count: usize) -> Vec<CheckIn> {
    let per_poi = counts(checkins, |c| &c.poi_id);
    let kept: Vec<CheckIn> = checkins
        .iter()
        .filter(|c| per_poi[c.poi_id.as_str()] >= min_count)
        .cloned()
        .collect();
    let per_user = counts(&kept, |c| &c.user_id);
    let users_ok: Vec<bool> = kept
        .iter()
        .map(|c| per_user[c.user_id.as_str()] >= min_count)
        .collect();
    kept.into_iter()
        .zip(users_ok)
        .filter_map(|(c, ok)| ok.then_some(c))
        .collect()
}

/// Removes POIs with fewer than `min_count` check-ins, then users with fewer
/// than `min_count` remaining check-ins. Order is preserved.
pub fn filter_min_activity(
    checkins: &[CheckIn],
    min_count: usize,
    mode: FilterMode,
) -> Vec<CheckIn> {
    let min_count = min_count.max(1);
    let mut current = one_pass(checkins, min_count);
    if mode == FilterMode::Fixpoint {
        loop {
            let next = one_pass(&current, min_count);
            if next.len() == current.len() {
                break;
            }
            current = next;
        }
    }
    current
}
