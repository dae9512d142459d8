use std::collections::BTreeMap;
use std::path::Path;

use super::SidError;

/// Embedding rows keyed by category name (or POI id), read from
/// `key<TAB>f1,f2,...,fD` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    rows: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn parse(text: &str) -> Result<Self, SidError> {
        let mut table = EmbeddingTable::default();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: &str| SidError::Embedding(format!("line {}: {msg}", lineno + 1));
            let (key, values) = line
                .split_once('\t')
                .ok_or_else(|| bad("missing tab separator"))?;
            let vector = values
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            table
                .insert(key.to_string(), vector)
                .map_err(|e| bad(&e.to_string()))?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SidError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| SidError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    pub fn insert(&mut self, key: String, vector: Vec<f64>) -> Result<(), SidError> {
        if vector.is_empty() || vector.iter().any(|x| !x.is_finite()) {
            return Err(SidError::Embedding(format!(
                "row {key:?} is empty or non-finite"
            )));
        }
        if self.rows.is_empty() {
            self.dim = vector.len();
        } else if vector.len() != self.dim {
            return Err(SidError::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.rows.insert(key.clone(), vector).is_some() {
            return Err(SidError::Embedding(format!("duplicate row {key:?}")));
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.rows.get(key).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.rows
            .iter()
            .map(|(k, v)| {
                let values: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("{k}\t{}\n", values.join(","))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows() {
        let t = EmbeddingTable::parse("Office\t0.5,1,-2\nParking\t0,0,1e-3\n").unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get("Parking").unwrap(), &[0.0, 0.0, 0.001]);
        assert_eq!(EmbeddingTable::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn rejects_ragged_and_duplicate_rows() {
        assert!(EmbeddingTable::parse("a\t1,2\nb\t1\n").is_err());
        assert!(EmbeddingTable::parse("a\t1,2\na\t1,3\n").is_err());
        assert!(EmbeddingTable::parse("a 1,2\n").is_err());
        assert!(EmbeddingTable::parse("a\t1,NaN\n").is_err());
    }
}
