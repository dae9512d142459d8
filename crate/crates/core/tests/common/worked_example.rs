//! Inputs reconstructed from the worked prompt example: one commuter
//! alternating between a parking garage and an office ~390 m apart.

use std::collections::BTreeMap;

use chrono::NaiveDateTime;
use geosid_core::geo::GeoPoint;
use geosid_core::ingest::{segment_trajectories, CheckIn, PoiRecord, Trajectory};
use geosid_core::prompt::AddressBook;
use geosid_core::sid::{RegistryEntry, SidConfig, SidRegistry, SpatialSemanticId};

pub const PARKING: (&str, f64, f64) = ("parking-85-washington", 40.7069, -74.0140);
pub const OFFICE: (&str, f64, f64) = ("office-101-broadway", 40.7094, -74.0108);
const EDT_MINUTES: i32 = -240;

pub const VISITS: [(&str, &str); 13] = [
    ("2012-04-11 04:59", "P"),
    ("2012-04-11 14:30", "O"),
    ("2012-04-12 04:50", "P"),
    ("2012-04-12 05:44", "O"),
    ("2012-04-13 04:56", "P"),
    ("2012-04-19 04:58", "P"),
    ("2012-04-19 05:50", "O"),
    ("2012-04-20 04:55", "P"),
    ("2012-04-20 06:07", "O"),
    ("2012-04-23 04:55", "P"),
    ("2012-04-23 05:27", "O"),
    ("2012-04-24 04:45", "P"),
    ("2012-04-24 04:58", "O"),
];

pub fn parking_sid() -> SpatialSemanticId {
    SpatialSemanticId::new(vec![161, 17], vec![21, 8], 0)
}

pub fn office_sid() -> SpatialSemanticId {
    SpatialSemanticId::new(vec![161, 115], vec![12, 7], 0)
}

pub fn checkins() -> Vec<CheckIn> {
    VISITS
        .iter()
        .enumerate()
        .map(|(index, (local, which))| {
            let (poi, lat, lng) = if *which == "P" { PARKING } else { OFFICE };
            let local = NaiveDateTime::parse_from_str(local, "%Y-%m-%d %H:%M").unwrap();
            CheckIn {
                index,
                user_id: "commuter".into(),
                poi_id: poi.into(),
                category_id: if *which == "P" {
                    "cat-parking"
                } else {
                    "cat-office"
                }
                .into(),
                category_name: if *which == "P" { "Parking" } else { "Office" }.into(),
                lat,
                lng,
                utc_timestamp: local.and_utc().timestamp() - EDT_MINUTES as i64 * 60,
                tz_offset_minutes: EDT_MINUTES,
            }
        })
        .collect()
}

/// The three trajectories produced by 24-hour segmentation.
pub fn trajectories() -> Vec<Trajectory> {
    segment_trajectories(&checkins(), 24.0)
}

pub fn registry() -> SidRegistry {
    let entries = [(PARKING, parking_sid()), (OFFICE, office_sid())]
        .into_iter()
        .map(|((poi, lat, lng), sid)| RegistryEntry {
            poi_id: poi.into(),
            sid,
            hex_cell_id: String::new(),
            location: GeoPoint::new(lat, lng).unwrap(),
        })
        .collect();
    SidRegistry::from_entries(SidConfig::default(), "89c25a".into(), entries).unwrap()
}

pub fn addresses() -> AddressBook {
    BTreeMap::from([
        (PARKING.0.to_string(), "85 Washington St".to_string()),
        (OFFICE.0.to_string(), "101 Broadway".to_string()),
    ])
}

pub fn catalog() -> Vec<PoiRecord> {
    let addresses = addresses();
    let mut seen = BTreeMap::new();
    for c in checkins() {
        seen.entry(c.poi_id.clone()).or_insert_with(|| PoiRecord {
            address: addresses.get(&c.poi_id).cloned(),
            ..PoiRecord::from_checkin(&c)
        });
    }
    seen.into_values().collect()
}
