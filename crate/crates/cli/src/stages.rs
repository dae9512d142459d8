//! File names of stage outputs inside a city directory.

use std::path::{Path, PathBuf};

pub const CHECKINS: &str = "checkins.jsonl";
pub const MANIFEST: &str = "manifest.jsonl";
pub const CATALOG: &str = "catalog.jsonl";
pub const ADDRESSES: &str = "addresses.tsv";
pub const REGISTRY: &str = "registry.jsonl";
pub const ALIGNMENT: &str = "alignment.jsonl";
pub const PRETRAIN: &str = "pretrain.jsonl";
pub const VALID_PROMPTS: &str = "valid_prompts.jsonl";
pub const TEST_PROMPTS: &str = "test_prompts.jsonl";
pub const SCORES: &str = "scores.jsonl";
pub const ADVANTAGES: &str = "advantages.jsonl";
pub const REPORT_JSON: &str = "eval_report.json";
pub const REPORT_CSV: &str = "eval_report.csv";
pub const CDF_CSV: &str = "error_cdf.csv";

pub fn at(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// Fails with a hint about which subcommand produces a missing input.
pub fn require(dir: &Path, name: &str, producer: &str) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    if !path.exists() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!(
                "{} not found; run `geosid {producer}` first",
                path.display()
            ),
        )
        .into());
    }
    Ok(path)
}
