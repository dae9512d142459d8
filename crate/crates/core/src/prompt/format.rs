use chrono::{Datelike, NaiveDateTime};

use super::SerializationConfig;
use crate::geo::bucket_distance;
use crate::ingest::CheckIn;

/// Stands in for a missing street address.
pub const ADDRESS_PLACEHOLDER: &str = "an unknown address";

pub fn ordinal_suffix(day: u32) -> &'static str {
    match (day % 10, day % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    }
}

/// `April 11th, 2012, Wednesday, 04:59`
pub fn format_datetime(t: &NaiveDateTime) -> String {
    format!(
        "{} {}{}, {}, {}, {}",
        t.format("%B"),
        t.day(),
        ordinal_suffix(t.day()),
        t.year(),
        t.format("%A"),
        t.format("%H:%M")
    )
}

/// One check-in line without the trailing separator, e.g.
/// `April 11th, 2012, Wednesday, 14:30, visit Office at 101 Broadway <m_161>..<c_0>, distance is Nearby.`
///
/// The distance clause appears only when `prev` is given and distances are enabled.
pub fn format_checkin_line(
    c: &CheckIn,
    sid_surface: &str,
    address: Option<&str>,
    prev: Option<&CheckIn>,
    cfg: &SerializationConfig,
) -> String {
    let mut line = format!(
        "{}, visit {}",
        format_datetime(&c.local_time()),
        c.category_name
    );
    if cfg.include_addresses {
        line.push_str(" at ");
        line.push_str(
            address
                .filter(|a| !a.trim().is_empty())
                .unwrap_or(ADDRESS_PLACEHOLDER),
        );
    }
    line.push(' ');
    line.push_str(sid_surface);
    if let (Some(prev), true) = (prev, cfg.include_distances) {
        let d = prev.location().distance_km(&c.location());
        if let Ok(bucket) = bucket_distance(d) {
            line.push_str(", distance is ");
            line.push_str(bucket.label());
        }
    }
    line.push('.');
    line
}
