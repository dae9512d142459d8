use std::fmt;

use super::{GeoError, GeoPoint};

/// Mean Earth radius.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance between two points on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlng = (b.lng - a.lng).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlng / 2.0).sin().powi(2);
    // h can drift a hair above 1 for antipodes.
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Five-bin discretization of the distance between consecutive check-ins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistanceBucket {
    Adjacent,
    Nearby,
    ShortHop,
    Far,
    Long,
}

impl DistanceBucket {
    /// Inclusive upper bounds in km; anything beyond the last is `Long`.
    pub const UPPER_BOUNDS_KM: [(f64, DistanceBucket); 4] = [
        (0.2, DistanceBucket::Adjacent),
        (1.2, DistanceBucket::Nearby),
        (3.0, DistanceBucket::ShortHop),
        (10.0, DistanceBucket::Far),
    ];

    pub fn label(&self) -> &'static str {
        match self {
            DistanceBucket::Adjacent => "Adjacent",
            DistanceBucket::Nearby => "Nearby",
            DistanceBucket::ShortHop => "Short hop",
            DistanceBucket::Far => "Far",
            DistanceBucket::Long => "Long",
        }
    }
}

impl fmt::Display for DistanceBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn bucket_distance(d_km: f64) -> Result<DistanceBucket, GeoError> {
    if !(d_km >= 0.0) {
        return Err(GeoError::InvalidDistance(d_km));
    }
    Ok(DistanceBucket::UPPER_BOUNDS_KM
        .iter()
        .find(|(bound, _)| d_km <= *bound)
        .map(|(_, bucket)| *bucket)
        .unwrap_or(DistanceBucket::Long))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lat: f64, lng: f64) -> GeoPoint {
        GeoPoint::new(lat, lng).unwrap()
    }

    #[test]
    fn identical_points_are_zero_apart() {
        let a = p(40.7128, -74.006);
        assert_eq!(haversine_km(&a, &a), 0.0);
    }

    #[test]
    fn antipodal_equator_is_half_circumference() {
        let d = haversine_km(&p(0.0, 0.0), &p(0.0, 180.0));
        assert!((d - std::f64::consts::PI * 6371.0).abs() < 1e-9);
        assert!((d - 20015.087).abs() < 0.01);
    }

    #[test]
    fn new_york_to_tokyo() {
        // Spherical law of cosines as an independent route.
        let (a, b) = (p(40.7128, -74.0060), p(35.6762, 139.6503));
        let (l1, l2) = (a.lat.to_radians(), b.lat.to_radians());
        let dl = (b.lng - a.lng).to_radians();
        let central = (l1.sin() * l2.sin() + l1.cos() * l2.cos() * dl.cos()).acos();
        let d = haversine_km(&a, &b);
        assert!((d - central * 6371.0).abs() < 1e-6);
        assert!((d - 10_851.733).abs() < 0.01, "{d}");
    }

    #[test]
    fn buckets_follow_inclusive_bounds() {
        assert_eq!(bucket_distance(0.15).unwrap(), DistanceBucket::Adjacent);
        assert_eq!(bucket_distance(0.2).unwrap(), DistanceBucket::Adjacent);
        assert_eq!(bucket_distance(1.2).unwrap(), DistanceBucket::Nearby);
        assert_eq!(bucket_distance(3.0).unwrap(), DistanceBucket::ShortHop);
        assert_eq!(bucket_distance(10.0).unwrap(), DistanceBucket::Far);
        assert_eq!(bucket_distance(12.0).unwrap(), DistanceBucket::Long);
        assert!(bucket_distance(-0.1).is_err());
        assert!(bucket_distance(f64::NAN).is_err());
    }

    #[test]
    fn out_of_bounds_point_rejected() {
        assert!(GeoPoint::new(91.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.5).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    fn point() -> impl Strategy<Value = GeoPoint> {
        (-90.0f64..=90.0, -180.0f64..=180.0).prop_map(|(lat, lng)| p(lat, lng))
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in point(), b in point(), c in point()) {
            prop_assert!(haversine_km(&a, &c) <= haversine_km(&a, &b) + haversine_km(&b, &c) + 1e-6);
        }

        #[test]
        fn symmetric_and_non_negative(a in point(), b in point()) {
            let d = haversine_km(&a, &b);
            prop_assert!(d >= 0.0);
            prop_assert!((d - haversine_km(&b, &a)).abs() < 1e-9);
        }

        #[test]
        fn bucket_monotone(d1 in 0.0f64..50.0, d2 in 0.0f64..50.0) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(bucket_distance(lo).unwrap() <= bucket_distance(hi).unwrap());
        }
    }
}
