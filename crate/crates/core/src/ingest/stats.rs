use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DatasetSplit;

/// Counts over every trajectory kept in the split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub users: usize,
    pub pois: usize,
    pub all_trajectories: usize,
    pub train_trajectories: usize,
    pub valid_trajectories: usize,
    pub test_trajectories: usize,
    pub categories: usize,
    pub checkins: usize,
}

pub fn dataset_stats(split: &DatasetSplit) -> DatasetStats {
    let (mut users, mut pois, mut categories) = (HashSet::new(), HashSet::new(), HashSet::new());
    let mut checkins = 0;
    for c in split.all().flat_map(|t| &t.checkins) {
        users.insert(c.user_id.as_str());
        pois.insert(c.poi_id.as_str());
        categories.insert(c.category_id.as_str());
        checkins += 1;
    }
    DatasetStats {
        users: users.len(),
        pois: pois.len(),
        all_trajectories: split.train.len() + split.valid.len() + split.test.len(),
        train_trajectories: split.train.len(),
        valid_trajectories: split.valid.len(),
        test_trajectories: split.test.len(),
        categories: categories.len(),
        checkins,
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Users\tPOIs\tAll Trajs\tValid Trajs\tTest Trajs\tCategory\tCheck-ins"
        )?;
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.users,
            self.pois,
            self.all_trajectories,
            self.valid_trajectories,
            self.test_trajectories,
            self.categories,
            self.checkins
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_split_counts_zero() {
        assert_eq!(
            dataset_stats(&DatasetSplit::default()),
            DatasetStats::default()
        );
    }
}
