use std::collections::BTreeMap;

use super::{CheckIn, Trajectory};

/// Splits each user's check-ins (sorted by local time) wherever two
/// consecutive visits are more than `gap_hours` apart. A gap of exactly
/// `gap_hours` stays in the same trajectory.
pub fn segment_trajectories(checkins: &[CheckIn], gap_hours: f64) -> Vec<Trajectory> {
    let max_gap = gap_hours * 3600.0;
    let mut by_user: BTreeMap<&str, Vec<&CheckIn>> = BTreeMap::new();
    for c in checkins {
        by_user.entry(&c.user_id).or_default().push(c);
    }
    let mut out = Vec::new();
    for (user, mut visits) in by_user {
        visits.sort_by_key(|c| (c.local_seconds(), c.index));
        let mut current: Vec<CheckIn> = Vec::new();
        let mut counter = 0;
        for c in visits {
            if let Some(prev) = current.last() {
                if (c.local_seconds() - prev.local_seconds()) as f64 > max_gap {
                    out.push(Trajectory {
                        trajectory_id: format!("{user}_{counter}"),
                        user_id: user.to_string(),
                        checkins: std::mem::take(&mut current),
                    });
                    counter += 1;
                }
            }
            current.push(c.clone());
        }
        if !current.is_empty() {
            out.push(Trajectory {
                trajectory_id: format!("{user}_{counter}"),
                user_id: user.to_string(),
                checkins: current,
            });
        }
    }
    out
}
