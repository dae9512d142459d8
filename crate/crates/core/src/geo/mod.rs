//! Geodesic distance, transition-distance buckets and S2 leaf cells.

mod cell;
mod distance;

pub use cell::{CellId, MAX_LEVEL};
pub use distance::{bucket_distance, haversine_km, DistanceBucket, EARTH_RADIUS_KM};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("coordinate out of bounds: lat={lat}, lng={lng}")]
    OutOfBounds { lat: f64, lng: f64 },
    #[error("distance must be a non-negative number, got {0}")]
    InvalidDistance(f64),
    #[error("cell level {requested} is invalid for a cell at level {level}")]
    InvalidLevel { requested: u8, level: u8 },
    #[error("invalid cell id hex {0:?}")]
    InvalidHex(String),
}

/// A WGS84 latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lng: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lng: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lng) {
            return Err(GeoError::OutOfBounds { lat, lng });
        }
        Ok(Self { lat, lng })
    }

    pub fn distance_km(&self, other: &GeoPoint) -> f64 {
        haversine_km(self, other)
    }
}
