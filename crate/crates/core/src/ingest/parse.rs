use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{CheckIn, IngestError};
use crate::geo::GeoPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// `user, venue, category id, category name, lat, lng, tz offset (min), UTC time`, tab separated.
    FoursquareTsv,
    /// `user, ISO-8601 time, lat, lng, poi`, tab or comma separated.
    Gowalla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFormat {
    /// `Tue Apr 03 18:00:09 +0000 2012`
    Twitter,
    /// `2010-10-19T23:55:27Z`
    Iso8601,
}

/// Zero-based column positions. Missing optional columns default to empty
/// strings (category) or a zero offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub user: usize,
    pub poi: usize,
    pub category_id: Option<usize>,
    pub category_name: Option<usize>,
    pub lat: usize,
    pub lng: usize,
    pub tz_offset_minutes: Option<usize>,
    pub time: usize,
    pub time_format: TimeFormat,
}

impl ColumnMap {
    pub fn for_format(format: DatasetFormat) -> Self {
        match format {
            DatasetFormat::FoursquareTsv => ColumnMap {
                user: 0,
                poi: 1,
                category_id: Some(2),
                category_name: Some(3),
                lat: 4,
                lng: 5,
                tz_offset_minutes: Some(6),
                time: 7,
                time_format: TimeFormat::Twitter,
            },
            DatasetFormat::Gowalla => ColumnMap {
                user: 0,
                poi: 4,
                category_id: None,
                category_name: None,
                lat: 2,
                lng: 3,
                tz_offset_minutes: None,
                time: 1,
                time_format: TimeFormat::Iso8601,
            },
        }
    }

    fn width(&self) -> usize {
        [
            Some(self.user),
            Some(self.poi),
            self.category_id,
            self.category_name,
            Some(self.lat),
            Some(self.lng),
            self.tz_offset_minutes,
            Some(self.time),
        ]
        .into_iter()
        .flatten()
        .max()
        .unwrap_or(0)
            + 1
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutput {
    pub checkins: Vec<CheckIn>,
    /// Non-blank lines seen.
    pub total_lines: usize,
    /// 1-based line numbers of rejected lines.
    pub malformed_lines: Vec<usize>,
}

/// Largest tolerated share of malformed lines.
const MAX_MALFORMED_FRACTION: f64 = 0.01;

fn parse_time(raw: &str, format: TimeFormat) -> Result<i64, String> {
    let raw = raw.trim();
    match format {
        TimeFormat::Twitter => DateTime::parse_from_str(raw, "%a %b %d %H:%M:%S %z %Y")
            .map(|t| t.timestamp())
            .map_err(|e| format!("bad time {raw:?}: {e}")),
        TimeFormat::Iso8601 => DateTime::parse_from_rfc3339(raw)
            .map(|t| t.timestamp())
            .or_else(|_| {
                NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S")
                    .map(|t| t.and_utc().timestamp())
            })
            .map_err(|e| format!("bad time {raw:?}: {e}")),
    }
}

fn parse_line(line: &str, index: usize, map: &ColumnMap) -> Result<CheckIn, String> {
    let sep = if line.contains('\t') { '\t' } else { ',' };
    let cols: Vec<&str> = line.split(sep).collect();
    if cols.len() < map.width() {
        return Err(format!(
            "expected {} columns, found {}",
            map.width(),
            cols.len()
        ));
    }
    let text = |i: Option<usize>| i.map(|i| cols[i].trim().to_string()).unwrap_or_default();
    let number = |i: usize| {
        cols[i]
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("column {i}: {e}"))
    };
    let (lat, lng) = (number(map.lat)?, number(map.lng)?);
    GeoPoint::new(lat, lng).map_err(|e| e.to_string())?;
    let tz_offset_minutes = match map.tz_offset_minutes {
        Some(i) => cols[i]
            .trim()
            .parse::<i32>()
            .map_err(|e| format!("tz offset: {e}"))?,
        None => 0,
    };
    let user_id = text(Some(map.user));
    let poi_id = text(Some(map.poi));
    if user_id.is_empty() || poi_id.is_empty() {
        return Err("empty user or poi id".into());
    }
    Ok(CheckIn {
        index,
        user_id,
        poi_id,
        category_id: text(map.category_id),
        category_name: text(map.category_name),
        lat,
        lng,
        utc_timestamp: parse_time(cols[map.time], map.time_format)?,
        tz_offset_minutes,
    })
}

/// Parses raw bytes (invalid UTF-8 is replaced, not rejected).
pub fn parse_checkins(bytes: &[u8], map: &ColumnMap) -> Result<ParseOutput, IngestError> {
    let mut out = ParseOutput::default();
    let mut first_reason = None;
    for (lineno, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = String::from_utf8_lossy(raw);
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        out.total_lines += 1;
        match parse_line(line, out.checkins.len(), map) {
            Ok(c) => out.checkins.push(c),
            Err(reason) => {
                first_reason.get_or_insert(reason);
                out.malformed_lines.push(lineno + 1);
            }
        }
    }
    let malformed = out.malformed_lines.len();
    if malformed as f64 > MAX_MALFORMED_FRACTION * out.total_lines as f64 {
        return Err(IngestError::Format {
            malformed,
            total: out.total_lines,
            first_line: out.malformed_lines[0],
            reason: first_reason.unwrap_or_default(),
        });
    }
    if malformed > 0 {
        log::warn!(
            "skipped {malformed} malformed lines (first at line {})",
            out.malformed_lines[0]
        );
    }
    Ok(out)
}

pub fn parse_checkin_file(path: &Path, map: &ColumnMap) -> Result<ParseOutput, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_checkins(&bytes, map)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = "470\t49bbd6c0f964a520f4531fe3\t4bf58dd8d48988d127951735\tArts & Crafts Store\t40.719810375488535\t-74.00258103213994\t-240\tTue Apr 03 18:00:09 +0000 2012";

    fn fsq() -> ColumnMap {
        ColumnMap::for_format(DatasetFormat::FoursquareTsv)
    }

    #[test]
    fn foursquare_line_with_offset() {
        let out = parse_checkins(LINE.as_bytes(), &fsq()).unwrap();
        let c = &out.checkins[0];
        assert_eq!(c.user_id, "470");
        assert_eq!(c.category_name, "Arts & Crafts Store");
        assert_eq!(c.tz_offset_minutes, -240);
        assert_eq!(
            c.local_time().format("%Y-%m-%d %H:%M:%S").to_string(),
            "2012-04-03 14:00:09"
        );
    }

    #[test]
    fn out_of_bounds_latitude_counted() {
        let mut text = String::new();
        for _ in 0..150 {
            text.push_str(LINE);
            text.push('\n');
        }
        text.push_str(&LINE.replace("40.719810375488535", "91.0"));
        let out = parse_checkins(text.as_bytes(), &fsq()).unwrap();
        assert_eq!(out.checkins.len(), 150);
        assert_eq!(out.malformed_lines, vec![151]);
    }

    #[test]
    fn too_many_malformed_lines_is_an_error() {
        let text = format!("{LINE}\nnot a record\n");
        match parse_checkins(text.as_bytes(), &fsq()) {
            Err(IngestError::Format {
                malformed: 1,
                first_line: 2,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gowalla_tab_and_comma() {
        let text = "0\t2010-10-19T23:55:27Z\t30.2359091167\t-97.7951395833\t22847\n1,2010-10-18T22:17:43Z,30.269,-97.749,420315\n";
        let out = parse_checkins(
            text.as_bytes(),
            &ColumnMap::for_format(DatasetFormat::Gowalla),
        )
        .unwrap();
        assert_eq!(out.checkins.len(), 2);
        assert_eq!(out.checkins[1].poi_id, "420315");
        assert_eq!(out.checkins[1].index, 1);
        assert_eq!(out.checkins[0].category_name, "");
        assert_eq!(out.checkins[0].utc_timestamp, 1287532527);
    }

    #[test]
    fn latin1_bytes_do_not_abort() {
        let mut bytes = LINE.replace("Arts & Crafts Store", "Caf").into_bytes();
        bytes.push(b'\n');
        let pos = bytes.iter().position(|&b| b == b'C').unwrap() + 3;
        bytes.insert(pos, 0xe9);
        let out = parse_checkins(&bytes, &fsq()).unwrap();
        assert!(out.checkins[0].category_name.starts_with("Caf"));
    }
}
