/// Mean and population standard deviation.
pub fn advantage_stats(rewards: &[f64]) -> (f64, f64) {
    if rewards.is_empty() {
        return (0.0, 0.0);
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Group-relative advantages `(r - mean) / (std + eps)`; a group whose spread
/// is below `eps` carries no signal and gets all zeros.
pub fn group_advantages(rewards: &[f64], eps: f64) -> Vec<f64> {
    let (mean, std) = advantage_stats(rewards);
    if std < eps {
        return vec![0.0; rewards.len()];
    }
    rewards.iter().map(|r| (r - mean) / (std + eps)).collect()
}
