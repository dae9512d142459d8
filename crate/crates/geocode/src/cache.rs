use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use geosid_core::geo::GeoPoint;

use crate::GeocodeError;

/// Coordinates rounded to six decimal places (about 0.1 m), stored as integers
/// so that equality is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey {
    pub lat_e6: i64,
    pub lng_e6: i64,
}

impl CacheKey {
    pub fn from_point(p: &GeoPoint) -> Self {
        Self {
            lat_e6: (p.lat * 1e6).round() as i64,
            lng_e6: (p.lng * 1e6).round() as i64,
        }
    }

    pub fn lat(&self) -> f64 {
        self.lat_e6 as f64 / 1e6
    }

    pub fn lng(&self) -> f64 {
        self.lng_e6 as f64 / 1e6
    }

    fn parse(lat: &str, lng: &str) -> Option<Self> {
        let lat: f64 = lat.parse().ok()?;
        let lng: f64 = lng.parse().ok()?;
        Some(Self::from_point(&GeoPoint { lat, lng }))
    }
}

impl fmt::Display for CacheKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}\t{:.6}", self.lat(), self.lng())
    }
}

/// Append-only `lat6 TAB lng6 TAB address TAB timestamp` file. On load a
/// later line for the same key replaces an earlier one.
#[derive(Debug, Default)]
pub struct GeocodeCache {
    path: Option<PathBuf>,
    entries: HashMap<CacheKey, (String, DateTime<Utc>)>,
}

impl GeocodeCache {
    /// A cache that is never persisted.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` if it exists; new entries are appended to it.
    pub fn open(path: &Path) -> Result<Self, GeocodeError> {
        let mut cache = Self {
            path: Some(path.to_path_buf()),
            entries: HashMap::new(),
        };
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(source) => {
                return Err(GeocodeError::CacheIo {
                    path: path.to_path_buf(),
                    source,
                })
            }
        };
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| GeocodeError::CacheIo {
                path: path.to_path_buf(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: &str| GeocodeError::CacheFormat {
                path: path.to_path_buf(),
                line: idx + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [lat, lng, address, ts] = fields[..] else {
                return Err(bad("expected four tab-separated fields"));
            };
            let key = CacheKey::parse(lat, lng).ok_or_else(|| bad("bad coordinates"))?;
            let ts = DateTime::parse_from_rfc3339(ts)
                .map_err(|_| bad("bad timestamp"))?
                .with_timezone(&Utc);
            cache.entries.insert(key, (address.to_string(), ts));
        }
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &CacheKey) -> Option<(&str, DateTime<Utc>)> {
        self.entries.get(key).map(|(a, t)| (a.as_str(), *t))
    }

    /// Stores an entry and appends it to the backing file. Tabs and line
    /// breaks in the address are folded to spaces.
    pub fn insert(
        &mut self,
        key: CacheKey,
        address: &str,
        fetched_at: DateTime<Utc>,
    ) -> Result<(), GeocodeError> {
        let address: String = address
            .chars()
            .map(|c| {
                if matches!(c, '\t' | '\n' | '\r') {
                    ' '
                } else {
                    c
                }
            })
            .collect();
        if let Some(path) = &self.path {
            let io = |source| GeocodeError::CacheIo {
                path: path.clone(),
                source,
            };
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(io)?;
            let ts = fetched_at.to_rfc3339_opts(SecondsFormat::Secs, true);
            writeln!(file, "{key}\t{address}\t{ts}").map_err(io)?;
        }
        self.entries.insert(key, (address, fetched_at));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(lat: f64, lng: f64) -> CacheKey {
        CacheKey::from_point(&GeoPoint::new(lat, lng).unwrap())
    }

    #[test]
    fn six_decimal_rounding() {
        assert_eq!(key(40.712800, -74.006000), key(40.7128004, -74.0060004));
        assert_ne!(key(40.712800, -74.006000), key(40.712801, -74.006000));
        assert_eq!(key(40.7128, -74.006).to_string(), "40.712800\t-74.006000");
    }

    #[test]
    fn round_trip_and_last_write_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.tsv");
        let t0 = DateTime::parse_from_rfc3339("2024-01-02T03:04:05Z")
            .unwrap()
            .with_timezone(&Utc);
        let mut cache = GeocodeCache::open(&path).unwrap();
        cache.insert(key(1.0, 2.0), "Old Rd", t0).unwrap();
        cache.insert(key(1.0, 2.0), "New\tRd", t0).unwrap();
        cache
            .insert(key(-3.5, 100.25), "Main St, Town", t0)
            .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("1.000000\t2.000000\tOld Rd\t2024-01-02T03:04:05Z\n"));
        let loaded = GeocodeCache::open(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded.get(&key(1.0, 2.0)), Some(("New Rd", t0)));
        assert_eq!(loaded.get(&key(-3.5, 100.25)), Some(("Main St, Town", t0)));
    }

    #[test]
    fn malformed_lines_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.tsv");
        std::fs::write(&path, "1.0\t2.0\tA\t2024-01-02T03:04:05Z\nbroken\n").unwrap();
        assert!(matches!(
            GeocodeCache::open(&path),
            Err(GeocodeError::CacheFormat { line: 2, .. })
        ));
    }
}
