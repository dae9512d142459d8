use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Token letters for geo positions; the first two match the `<m_..><n_..>` surface form.
pub const GEO_LETTERS: [char; 8] = ['m', 'n', 'o', 'p', 'q', 'r', 's', 't'];
/// Token letters for semantic levels. `c` is reserved for the suffix.
pub const SEMANTIC_LETTERS: [char; 8] = ['a', 'b', 'd', 'e', 'f', 'g', 'h', 'i'];
pub const SUFFIX_LETTER: char = 'c';

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SidParseError {
    #[error("no id token run found")]
    NoMatch,
    #[error("incomplete id token run starting at byte {0}")]
    PartialMatch(usize),
    #[error("token <{letter}_{value}> out of range (max {max})")]
    OutOfRange {
        letter: char,
        value: String,
        max: u64,
    },
}

/// Token layout of an id: how many geo tokens, semantic levels and the
/// semantic codebook size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SidShape {
    pub geo_tokens: usize,
    pub semantic_levels: usize,
    pub codebook_size: usize,
}

impl Default for SidShape {
    fn default() -> Self {
        Self {
            geo_tokens: 2,
            semantic_levels: 2,
            codebook_size: 28,
        }
    }
}

impl SidShape {
    pub fn len(&self) -> usize {
        self.geo_tokens + self.semantic_levels + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_supported(&self) -> bool {
        (1..=GEO_LETTERS.len()).contains(&self.geo_tokens)
            && (1..=SEMANTIC_LETTERS.len()).contains(&self.semantic_levels)
            && self.codebook_size >= 1
    }

    /// Letter and inclusive maximum for each position of a token sequence.
    pub fn slots(&self) -> Vec<Slot> {
        let geo = (0..self.geo_tokens).map(Slot::Geo);
        let sem = (0..self.semantic_levels).map(Slot::Semantic);
        geo.chain(sem)
            .chain(std::iter::once(Slot::Suffix))
            .collect()
    }

    pub fn slot_max(&self, slot: Slot) -> u64 {
        match slot {
            Slot::Geo(_) => 255,
            Slot::Semantic(_) => self.codebook_size as u64 - 1,
            Slot::Suffix => u32::MAX as u64,
        }
    }

    fn pattern(&self) -> String {
        self.slots()
            .iter()
            .map(|s| format!("<{}_([0-9]+)>", s.letter()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Geo(usize),
    Semantic(usize),
    Suffix,
}

impl Slot {
    pub fn letter(&self) -> char {
        match self {
            Slot::Geo(i) => GEO_LETTERS[*i],
            Slot::Semantic(i) => SEMANTIC_LETTERS[*i],
            Slot::Suffix => SUFFIX_LETTER,
        }
    }
}

/// One surface token such as `<m_161>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SidToken {
    pub slot: Slot,
    pub value: u32,
}

impl fmt::Display for SidToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}_{}>", self.slot.letter(), self.value)
    }
}

/// `[g; s; u]`: geospatial prefix, semantic anchor, differentiating suffix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpatialSemanticId {
    #[serde(rename = "g")]
    pub geo: Vec<u8>,
    #[serde(rename = "s")]
    pub semantic: Vec<u16>,
    #[serde(rename = "u")]
    pub suffix: u32,
}

impl SpatialSemanticId {
    pub fn new(geo: Vec<u8>, semantic: Vec<u16>, suffix: u32) -> Self {
        Self {
            geo,
            semantic,
            suffix,
        }
    }

    /// Token values in trie order: geo, then semantic, then suffix.
    pub fn values(&self) -> Vec<u32> {
        self.geo
            .iter()
            .map(|&g| g as u32)
            .chain(self.semantic.iter().map(|&s| s as u32))
            .chain(std::iter::once(self.suffix))
            .collect()
    }

    pub fn tokens(&self) -> Vec<SidToken> {
        let geo = self.geo.iter().enumerate().map(|(i, &g)| SidToken {
            slot: Slot::Geo(i),
            value: g as u32,
        });
        let sem = self.semantic.iter().enumerate().map(|(i, &s)| SidToken {
            slot: Slot::Semantic(i),
            value: s as u32,
        });
        geo.chain(sem)
            .chain(std::iter::once(SidToken {
                slot: Slot::Suffix,
                value: self.suffix,
            }))
            .collect()
    }

    pub fn render(&self) -> String {
        self.tokens().iter().map(ToString::to_string).collect()
    }

    /// True when the token counts and value ranges fit `shape`.
    pub fn fits(&self, shape: &SidShape) -> bool {
        self.geo.len() == shape.geo_tokens
            && self.semantic.len() == shape.semantic_levels
            && self
                .semantic
                .iter()
                .all(|&s| (s as usize) < shape.codebook_size)
    }
}

impl fmt::Display for SpatialSemanticId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Compiled grammar for one [`SidShape`].
#[derive(Debug, Clone)]
pub struct SidGrammar {
    shape: SidShape,
    full: Regex,
    anchored: Regex,
    head: Regex,
}

impl SidGrammar {
    pub fn new(shape: SidShape) -> Self {
        assert!(shape.is_supported(), "unsupported id shape {shape:?}");
        let pattern = shape.pattern();
        Self {
            shape,
            full: Regex::new(&pattern).expect("static pattern"),
            anchored: Regex::new(&format!(r"\A\s*{pattern}\s*\z")).expect("static pattern"),
            head: Regex::new(&format!("<{}_[0-9]+>", GEO_LETTERS[0])).expect("static pattern"),
        }
    }

    pub fn shape(&self) -> &SidShape {
        &self.shape
    }

    /// Extracts the first complete token run in `text`.
    pub fn parse(&self, text: &str) -> Result<SpatialSemanticId, SidParseError> {
        match self.full.captures(text) {
            Some(caps) => self.from_captures(&caps),
            None => match self.head.find(text) {
                Some(m) => Err(SidParseError::PartialMatch(m.start())),
                None => Err(SidParseError::NoMatch),
            },
        }
    }

    /// Parses `text` only if it is a single token run, optionally padded with whitespace.
    pub fn parse_exact(&self, text: &str) -> Option<SpatialSemanticId> {
        self.anchored
            .captures(text)
            .and_then(|caps| self.from_captures(&caps).ok())
    }

    /// Number of non-overlapping complete runs in `text`.
    pub fn count_runs(&self, text: &str) -> usize {
        self.full.find_iter(text).count()
    }

    fn from_captures(
        &self,
        caps: &regex::Captures<'_>,
    ) -> Result<SpatialSemanticId, SidParseError> {
        let mut values = Vec::with_capacity(self.shape.len());
        for (idx, slot) in self.shape.slots().into_iter().enumerate() {
            let raw = &caps[idx + 1];
            let max = self.shape.slot_max(slot);
            let value = raw
                .parse::<u64>()
                .ok()
                .filter(|v| *v <= max)
                .ok_or_else(|| SidParseError::OutOfRange {
                    letter: slot.letter(),
                    value: raw.to_string(),
                    max,
                })?;
            values.push(value);
        }
        let b = self.shape.geo_tokens;
        let l = self.shape.semantic_levels;
        Ok(SpatialSemanticId {
            geo: values[..b].iter().map(|&v| v as u8).collect(),
            semantic: values[b..b + l].iter().map(|&v| v as u16).collect(),
            suffix: values[b + l] as u32,
        })
    }
}

impl Default for SidGrammar {
    fn default() -> Self {
        SidGrammar::new(SidShape::default())
    }
}

pub fn render_sid(sid: &SpatialSemanticId) -> String {
    sid.render()
}

/// Parses the first `<m_..><n_..><a_..><b_..><c_..>` run in `text`.
pub fn parse_sid(text: &str) -> Result<SpatialSemanticId, SidParseError> {
    SidGrammar::default().parse(text)
}
