use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{error_distribution, hit_rate_at_k, ndcg_at_k, EvalError, PredictionRecord};

pub const DEFAULT_KS: [usize; 4] = [1, 5, 10, 20];
pub const DEFAULT_PERCENTILES: [u32; 3] = [50, 75, 90];
pub const DEFAULT_CDF_POINTS: usize = 200;
pub const CSV_HEADER: &str = "metric,key,value";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub distance_km: f64,
    pub cumulative_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_queries: usize,
    pub n_unresolved: usize,
    pub hr_at: BTreeMap<usize, f64>,
    pub ndcg_at: BTreeMap<usize, f64>,
    pub error_percentiles: BTreeMap<u32, f64>,
    pub cdf: Vec<CdfPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// Picks the format from a file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

/// All metrics in one pass. With no resolvable locations the distance part
/// is left empty rather than failing the whole report.
pub fn evaluate(
    records: &[PredictionRecord],
    ks: &[usize],
    percentiles: &[u32],
    cdf_points: usize,
) -> Result<EvalReport, EvalError> {
    let mut report = EvalReport {
        n_queries: records.len(),
        ..Default::default()
    };
    for &k in ks {
        report.hr_at.insert(k, hit_rate_at_k(records, k)?);
        report.ndcg_at.insert(k, ndcg_at_k(records, k)?);
    }
    match error_distribution(records, percentiles, cdf_points) {
        Ok(dist) => {
            report.n_unresolved = dist.n_unresolved;
            report.error_percentiles = dist.percentiles;
            report.cdf = dist
                .cdf
                .into_iter()
                .map(|(distance_km, cumulative_fraction)| CdfPoint {
                    distance_km,
                    cumulative_fraction,
                })
                .collect();
        }
        Err(EvalError::NoResolvedRecords) => report.n_unresolved = records.len(),
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Averages the metrics of repeated runs over the same queries. The CDF grids
/// of different runs do not line up, so the mean report carries none.
pub fn mean_report(reports: &[EvalReport]) -> Result<EvalReport, EvalError> {
    let first = reports
        .first()
        .ok_or_else(|| EvalError::Incompatible("no reports".into()))?;
    if reports.iter().any(|r| {
        r.n_queries != first.n_queries
            || !same_keys(&r.hr_at, &first.hr_at)
            || !same_keys(&r.ndcg_at, &first.ndcg_at)
            || !same_keys(&r.error_percentiles, &first.error_percentiles)
    }) {
        return Err(EvalError::Incompatible(
            "reports differ in query count or metric keys".into(),
        ));
    }
    let n = reports.len() as f64;
    fn avg<K: Ord + Copy>(
        reports: &[EvalReport],
        n: f64,
        get: impl Fn(&EvalReport) -> &BTreeMap<K, f64>,
    ) -> BTreeMap<K, f64> {
        get(&reports[0])
            .keys()
            .map(|k| (*k, reports.iter().map(|r| get(r)[k]).sum::<f64>() / n))
            .collect()
    }
    Ok(EvalReport {
        n_queries: first.n_queries,
        n_unresolved: (reports.iter().map(|r| r.n_unresolved).sum::<usize>() as f64 / n).round()
            as usize,
        hr_at: avg(reports, n, |r| &r.hr_at),
        ndcg_at: avg(reports, n, |r| &r.ndcg_at),
        error_percentiles: avg(reports, n, |r| &r.error_percentiles),
        cdf: Vec::new(),
    })
}

fn same_keys<K: Ord, V>(a: &BTreeMap<K, V>, b: &BTreeMap<K, V>) -> bool {
    a.len() == b.len() && a.keys().zip(b.keys()).all(|(x, y)| x == y)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl ToString) -> EvalError {
    EvalError::Format {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

pub fn write_report(
    report: &EvalReport,
    path: &Path,
    format: ReportFormat,
) -> Result<(), EvalError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report).map_err(|e| format_err(path, e))?;
            out.write_all(b"\n").map_err(io_err(path))?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            let mut row =
                |metric: &str, key: String, value: String| w.write_record([metric, &key, &value]);
            let res = (|| -> csv::Result<()> {
                row("metric", "key".into(), "value".into())?;
                row("n_queries", String::new(), report.n_queries.to_string())?;
                row(
                    "n_unresolved",
                    String::new(),
                    report.n_unresolved.to_string(),
                )?;
                for (k, v) in &report.hr_at {
                    row("hr", k.to_string(), v.to_string())?;
                }
                for (k, v) in &report.ndcg_at {
                    row("ndcg", k.to_string(), v.to_string())?;
                }
                for (k, v) in &report.error_percentiles {
                    row("error_percentile", k.to_string(), v.to_string())?;
                }
                for p in &report.cdf {
                    row(
                        "cdf",
                        p.distance_km.to_string(),
                        p.cumulative_fraction.to_string(),
                    )?;
                }
                Ok(())
            })();
            res.map_err(|e| format_err(path, e))?;
            w.flush().map_err(io_err(path))?;
        }
    }
    out.flush().map_err(io_err(path))
}

pub fn read_report(path: &Path, format: ReportFormat) -> Result<EvalReport, EvalError> {
    let file = File::open(path).map_err(io_err(path))?;
    match format {
        ReportFormat::Json => {
            serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| format_err(path, e))
        }
        ReportFormat::Csv => {
            let mut reader = csv::Reader::from_reader(file);
            let header = reader
                .headers()
                .map_err(|e| format_err(path, e))?
                .iter()
                .collect::<Vec<_>>()
                .join(",");
            if header != CSV_HEADER {
                return Err(format_err(path, format!("unexpected header {header:?}")));
            }
            let mut report = EvalReport::default();
            for row in reader.records() {
                let row = row.map_err(|e| format_err(path, e))?;
                let (metric, key, value) = (&row[0], &row[1], &row[2]);
                let bad = |what: &str| {
                    format_err(path, format!("bad {what} in row {metric},{key},{value}"))
                };
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad("number"));
                match metric {
                    "n_queries" => report.n_queries = value.parse().map_err(|_| bad("count"))?,
                    "n_unresolved" => {
                        report.n_unresolved = value.parse().map_err(|_| bad("count"))?
                    }
                    "hr" => {
                        report
                            .hr_at
                            .insert(key.parse().map_err(|_| bad("cutoff"))?, num(value)?);
                    }
                    "ndcg" => {
                        report
                            .ndcg_at
                            .insert(key.parse().map_err(|_| bad("cutoff"))?, num(value)?);
                    }
                    "error_percentile" => {
                        report
                            .error_percentiles
                            .insert(key.parse().map_err(|_| bad("percentile"))?, num(value)?);
                    }
                    "cdf" => report.cdf.push(CdfPoint {
                        distance_km: num(key)?,
                        cumulative_fraction: num(value)?,
                    }),
                    other => return Err(format_err(path, format!("unknown metric {other:?}"))),
                }
            }
            Ok(report)
        }
    }
}

/// Two-column CDF export for plotting.
pub fn write_cdf_csv(report: &EvalReport, path: &Path) -> Result<(), EvalError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let res = (|| -> csv::Result<()> {
        w.write_record(["distance_km", "cumulative_fraction"])?;
        for p in &report.cdf {
            w.write_record([p.distance_km.to_string(), p.cumulative_fraction.to_string()])?;
        }
        Ok(())
    })();
    res.map_err(|e| format_err(path, e))?;
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EvalReport {
        EvalReport {
            n_queries: 3,
            n_unresolved: 1,
            hr_at: BTreeMap::from([(1, 1.0 / 3.0), (5, 2.0 / 3.0)]),
            ndcg_at: BTreeMap::from([(1, 1.0 / 3.0), (5, 0.5436432511904858)]),
            error_percentiles: BTreeMap::from([(50, 0.123456789), (90, 7.5)]),
            cdf: vec![
                CdfPoint {
                    distance_km: 0.0,
                    cumulative_fraction: 0.0,
                },
                CdfPoint {
                    distance_km: 7.5,
                    cumulative_fraction: 2.0 / 3.0,
                },
            ],
        }
    }

    #[test]
    fn round_trips_in_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        for (name, fmt) in [("r.json", ReportFormat::Json), ("r.csv", ReportFormat::Csv)] {
            let path = dir.path().join(name);
            assert_eq!(ReportFormat::from_path(&path), fmt);
            for report in [sample(), EvalReport::default()] {
                write_report(&report, &path, fmt).unwrap();
                assert_eq!(read_report(&path, fmt).unwrap(), report);
            }
        }
    }

    #[test]
    fn csv_layout_is_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report(&sample(), &path, ReportFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let expected = "metric,key,value\nn_queries,,3\nn_unresolved,,1\nhr,1,0.3333333333333333\nhr,5,0.6666666666666666\n\
ndcg,1,0.3333333333333333\nndcg,5,0.5436432511904858\nerror_percentile,50,0.123456789\nerror_percentile,90,7.5\n\
cdf,0,0\ncdf,7.5,0.6666666666666666\n";
        assert_eq!(text, expected);
        write_report(&EvalReport::default(), &path, ReportFormat::Csv).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "metric,key,value\nn_queries,,0\nn_unresolved,,0\n"
        );
    }

    #[test]
    fn cdf_export() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cdf.csv");
        write_cdf_csv(&sample(), &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "distance_km,cumulative_fraction\n0,0\n7.5,0.6666666666666666\n"
        );
    }

    #[test]
    fn mean_of_runs() {
        let mut other = sample();
        other.hr_at.insert(1, 2.0 / 3.0);
        other.error_percentiles.insert(50, 1.0);
        let mean = mean_report(&[sample(), other.clone()]).unwrap();
        assert!((mean.hr_at[&1] - 0.5).abs() < 1e-12);
        assert!((mean.error_percentiles[&50] - (0.123456789 + 1.0) / 2.0).abs() < 1e-12);
        assert!(mean.cdf.is_empty());
        other.n_queries = 4;
        assert!(mean_report(&[sample(), other]).is_err());
        assert!(mean_report(&[]).is_err());
    }
}
