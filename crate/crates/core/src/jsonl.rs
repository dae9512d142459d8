//! Line-delimited JSON helpers shared by the stage file formats.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
}

pub fn write_records<T: Serialize, W: Write>(
    mut out: W,
    records: impl IntoIterator<Item = T>,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_file<T: Serialize>(
    path: &Path,
    records: impl IntoIterator<Item = T>,
) -> Result<(), JsonlError> {
    let io = |source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_records(BufWriter::new(file), records).map_err(io)
}

/// Parses every non-blank line; the first bad record is an error.
pub fn read_records<T: DeserializeOwned, R: BufRead>(input: R) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| JsonlError::Record {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| JsonlError::Record {
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let file = File::open(path).map_err(|source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_records(BufReader::new(file))
}

/// Lenient variant: returns parsed records plus the 1-based numbers of lines that failed.
pub fn read_records_lenient<T: DeserializeOwned, R: BufRead>(
    input: R,
) -> std::io::Result<(Vec<T>, Vec<usize>)> {
    let (mut ok, mut bad) = (Vec::new(), Vec::new());
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => ok.push(r),
            Err(_) => bad.push(idx + 1),
        }
    }
    Ok((ok, bad))
}
