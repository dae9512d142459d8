use super::{RewardConfig, RewardError};

/// `clip(r_max + kappa * (ln(1+d) - ln(1+d_near)), r_min, r_max)`, full
/// credit up to `d_near_km` and `r_min` from `d_far_km` on.
pub fn distance_reward(d_km: f64, cfg: &RewardConfig) -> Result<f64, RewardError> {
    if !(d_km >= 0.0) {
        return Err(RewardError::InvalidDistance(d_km));
    }
    let raw = cfg.r_max + cfg.kappa() * (d_km.ln_1p() - cfg.d_near_km.ln_1p());
    Ok(raw.clamp(cfg.r_min, cfg.r_max))
}
