#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic")
}

pub fn fixture(name: &str) -> PathBuf {
    fixture_dir().join(name)
}

pub const CITY: &str = "synthetic";

/// Stage outputs covered by the golden hashes, in pipeline order.
pub const STAGE_FILES: [&str; 14] = [
    "checkins.jsonl",
    "manifest.jsonl",
    "catalog.jsonl",
    "addresses.tsv",
    "registry.jsonl",
    "alignment.jsonl",
    "pretrain.jsonl",
    "valid_prompts.jsonl",
    "test_prompts.jsonl",
    "scores.jsonl",
    "advantages.jsonl",
    "eval_report.json",
    "eval_report.csv",
    "error_cdf.csv",
];

pub const INGEST_FILES: [&str; 3] = ["checkins.jsonl", "manifest.jsonl", "catalog.jsonl"];

pub fn geosid(args: &[&str], out: &Path) -> Output {
    let config = fixture("pipeline.toml");
    Command::new(env!("CARGO_BIN_EXE_geosid"))
        .args(args)
        .arg("--config")
        .arg(&config)
        .arg("--output-dir")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn geosid")
}

pub fn geosid_ok(args: &[&str], out: &Path) -> Output {
    let o = geosid(args, out);
    assert!(
        o.status.success(),
        "geosid {args:?} failed with {:?}\nstdout: {}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

/// ingest → geocode (offline, seeded cache) → build-sid → emit-prompts →
/// score → advantages → evaluate. Returns the wall time.
pub fn run_pipeline(out: &Path) -> Duration {
    std::fs::create_dir_all(out).unwrap();
    std::fs::copy(fixture("geocode_cache.tsv"), out.join("geocode_cache.tsv")).unwrap();
    let rollouts = fixture("rollouts.jsonl");
    let predictions = fixture("predictions.jsonl");
    let start = Instant::now();
    for args in [
        vec!["ingest"],
        vec!["geocode"],
        vec!["build-sid"],
        vec!["emit-prompts"],
        vec!["score", "--rollouts", rollouts.to_str().unwrap()],
        vec!["advantages"],
        vec!["evaluate", "--predictions", predictions.to_str().unwrap()],
    ] {
        geosid_ok(&args, out);
    }
    start.elapsed()
}

pub fn sha256_file(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    format!("{:x}", Sha256::digest(bytes))
}

pub fn stage_hashes(out: &Path, files: &[&str]) -> Vec<(String, String)> {
    let dir = out.join(CITY);
    files
        .iter()
        .map(|f| (f.to_string(), sha256_file(&dir.join(f))))
        .collect()
}

/// Golden `sha256  file` lines.
pub fn golden_hashes() -> Vec<(String, String)> {
    let text = std::fs::read_to_string(fixture("golden_hashes.txt")).unwrap_or_default();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            l.split_once("  ")
                .map(|(h, f)| (f.to_string(), h.to_string()))
        })
        .collect()
}

pub fn write_golden_hashes(hashes: &[(String, String)]) {
    let mut text = String::from("# sha256 of each stage output of the synthetic pipeline run\n");
    for (file, hash) in hashes {
        text.push_str(&format!("{hash}  {file}\n"));
    }
    std::fs::write(fixture("golden_hashes.txt"), text).unwrap();
}
