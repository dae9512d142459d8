use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::id::{SidGrammar, SidShape, SidToken, SpatialSemanticId};
use super::prefix::{geospatial_prefix, shared_hex_prefix};
use super::rvq::RvqModel;
use super::trie::SidTrie;
use super::{EmbeddingTable, SidError};
use crate::geo::{CellId, GeoPoint};
use crate::ingest::PoiRecord;

/// More suffixes than this in one `(g, s)` class is logged, not rejected.
pub const MAX_OBSERVED_SUFFIXES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LcpScope {
    /// Prefix computed over the catalog being registered.
    #[default]
    PerDataset,
    /// Catalog is the union of several cities; one shared vocabulary.
    Union,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKey {
    /// One embedding row per category name; the quantizer trains on distinct categories.
    #[default]
    Category,
    /// One embedding row per POI id.
    Poi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SidConfig {
    pub geo_token_count: usize,
    pub rvq_levels: usize,
    pub rvq_codebook_size: usize,
    pub lcp_scope: LcpScope,
    pub rng_seed: u64,
    pub embedding_key: EmbeddingKey,
}

impl Default for SidConfig {
    fn default() -> Self {
        Self {
            geo_token_count: 2,
            rvq_levels: 2,
            rvq_codebook_size: 28,
            lcp_scope: LcpScope::PerDataset,
            rng_seed: 42,
            embedding_key: EmbeddingKey::Category,
        }
    }
}

impl SidConfig {
    pub fn shape(&self) -> SidShape {
        SidShape {
            geo_tokens: self.geo_token_count,
            semantic_levels: self.rvq_levels,
            codebook_size: self.rvq_codebook_size,
        }
    }

    pub fn validate(&self) -> Result<(), SidError> {
        if !self.shape().is_supported() {
            return Err(SidError::Config(format!(
                "geo tokens must be in 1..=8, rvq levels in 1..=8 and codebook size >= 1 (got {:?})",
                self.shape()
            )));
        }
        if self.rvq_codebook_size > u16::MAX as usize + 1 {
            return Err(SidError::Config("codebook size exceeds 65536".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistryEntry {
    pub poi_id: String,
    pub sid: SpatialSemanticId,
    pub hex_cell_id: String,
    pub location: GeoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryHeader {
    pub lcp: String,
    pub config: SidConfig,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RegistryRecord {
    poi_id: String,
    g: Vec<u8>,
    s: Vec<u16>,
    u: u32,
    surface: String,
    hex_cell_id: String,
    lat: f64,
    lng: f64,
}

/// Bijection between POI ids and their spatial-semantic ids, with a prefix
/// trie over the registered token sequences. Immutable once built.
#[derive(Debug, Clone)]
pub struct SidRegistry {
    config: SidConfig,
    lcp: String,
    entries: Vec<RegistryEntry>,
    by_poi: HashMap<String, usize>,
    by_sid: HashMap<SpatialSemanticId, usize>,
    trie: SidTrie,
    grammar: SidGrammar,
}

impl SidRegistry {
    /// Assembles a registry from explicit entries, checking the bijection.
    pub fn from_entries(
        config: SidConfig,
        lcp: String,
        mut entries: Vec<RegistryEntry>,
    ) -> Result<Self, SidError> {
        config.validate()?;
        let shape = config.shape();
        entries.sort_by(|a, b| a.poi_id.cmp(&b.poi_id));
        let mut by_poi = HashMap::with_capacity(entries.len());
        let mut by_sid = HashMap::with_capacity(entries.len());
        let mut trie = SidTrie::new(shape);
        for (idx, entry) in entries.iter().enumerate() {
            if !entry.sid.fits(&shape) {
                return Err(SidError::Config(format!(
                    "id {} of {} does not fit {shape:?}",
                    entry.sid, entry.poi_id
                )));
            }
            if by_poi.insert(entry.poi_id.clone(), idx).is_some() {
                return Err(SidError::NotBijective(format!(
                    "poi {} registered twice",
                    entry.poi_id
                )));
            }
            if let Some(prev) = by_sid.insert(entry.sid.clone(), idx) {
                return Err(SidError::NotBijective(format!(
                    "{} and {} share id {}",
                    entries[prev].poi_id, entry.poi_id, entry.sid
                )));
            }
            trie.insert(&entry.sid);
        }
        Ok(Self {
            config,
            lcp,
            entries,
            by_poi,
            by_sid,
            trie,
            grammar: SidGrammar::new(shape),
        })
    }

    pub fn config(&self) -> &SidConfig {
        &self.config
    }

    pub fn shape(&self) -> SidShape {
        self.config.shape()
    }

    pub fn grammar(&self) -> &SidGrammar {
        &self.grammar
    }

    pub fn lcp(&self) -> &str {
        &self.lcp
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sid_of(&self, poi_id: &str) -> Option<&SpatialSemanticId> {
        self.by_poi.get(poi_id).map(|&i| &self.entries[i].sid)
    }

    pub fn entry_for_sid(&self, sid: &SpatialSemanticId) -> Option<&RegistryEntry> {
        self.by_sid.get(sid).map(|&i| &self.entries[i])
    }

    pub fn location_of(&self, sid: &SpatialSemanticId) -> Option<GeoPoint> {
        self.entry_for_sid(sid).map(|e| e.location)
    }

    pub fn contains_sid(&self, sid: &SpatialSemanticId) -> bool {
        self.by_sid.contains_key(sid)
    }

    pub fn trie(&self) -> &SidTrie {
        &self.trie
    }

    /// Tokens that extend `prefix` toward a registered id.
    pub fn valid_next_tokens(&self, prefix: &[u32]) -> Vec<SidToken> {
        self.trie.valid_next_tokens(prefix)
    }

    pub fn header(&self) -> RegistryHeader {
        RegistryHeader {
            lcp: self.lcp.clone(),
            config: self.config.clone(),
            seed: self.config.rng_seed,
        }
    }

    /// Header line followed by one record per POI, in poi_id order.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut out, &self.header())?;
        out.write_all(b"\n")?;
        for e in &self.entries {
            let record = RegistryRecord {
                poi_id: e.poi_id.clone(),
                g: e.sid.geo.clone(),
                s: e.sid.semantic.clone(),
                u: e.sid.suffix,
                surface: e.sid.render(),
                hex_cell_id: e.hex_cell_id.clone(),
                lat: e.location.lat,
                lng: e.location.lng,
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, SidError> {
        let mut lines = input.lines().enumerate();
        let format_err = |line: usize, message: String| SidError::Format {
            line: line + 1,
            message,
        };
        let (_, header) = lines
            .next()
            .ok_or_else(|| format_err(0, "missing header".into()))?;
        let header = header.map_err(|e| SidError::Io(e.to_string()))?;
        let header: RegistryHeader =
            serde_json::from_str(&header).map_err(|e| format_err(0, e.to_string()))?;
        let mut entries = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|e| SidError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: RegistryRecord =
                serde_json::from_str(&line).map_err(|e| format_err(idx, e.to_string()))?;
            let sid = SpatialSemanticId::new(r.g, r.s, r.u);
            if sid.render() != r.surface {
                return Err(format_err(
                    idx,
                    format!("surface {} does not match tokens {}", r.surface, sid),
                ));
            }
            let location = GeoPoint::new(r.lat, r.lng)?;
            entries.push(RegistryEntry {
                poi_id: r.poi_id,
                sid,
                hex_cell_id: r.hex_cell_id,
                location,
            });
        }
        SidRegistry::from_entries(header.config, header.lcp, entries)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }
}

/// Suffix numbering within each `(g, s)` class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuffixAssignment {
    pub suffixes: BTreeMap<String, u32>,
    /// Classes with more than [`MAX_OBSERVED_SUFFIXES`] members, with their sizes.
    pub oversized: Vec<((Vec<u8>, Vec<u16>), usize)>,
}

/// Numbers POIs 0, 1, 2, ... within each `(g, s)` class in ascending poi_id order.
pub fn assign_suffixes(groups: &BTreeMap<(Vec<u8>, Vec<u16>), Vec<String>>) -> SuffixAssignment {
    let mut out = SuffixAssignment::default();
    for (key, members) in groups {
        let mut members: Vec<&String> = members.iter().collect();
        members.sort();
        members.dedup();
        if members.len() > MAX_OBSERVED_SUFFIXES {
            log::warn!(
                "class g={:?} s={:?} has {} members",
                key.0,
                key.1,
                members.len()
            );
            out.oversized.push((key.clone(), members.len()));
        }
        for (u, poi) in members.into_iter().enumerate() {
            out.suffixes.insert(poi.clone(), u as u32);
        }
    }
    out
}

/// Composes leaf cell -> stripped hex prefix -> geo tokens, quantizer ->
/// semantic tokens, and suffix numbering into a bijective registry.
pub fn build_registry(
    catalog: &[PoiRecord],
    embeddings: &EmbeddingTable,
    config: &SidConfig,
) -> Result<SidRegistry, SidError> {
    build_registry_with_model(catalog, embeddings, config).map(|(registry, _)| registry)
}

pub fn build_registry_with_model(
    catalog: &[PoiRecord],
    embeddings: &EmbeddingTable,
    config: &SidConfig,
) -> Result<(SidRegistry, RvqModel), SidError> {
    config.validate()?;
    if catalog.is_empty() {
        return Err(SidError::EmptyCatalog);
    }
    let mut pois: Vec<&PoiRecord> = catalog.iter().collect();
    pois.sort_by(|a, b| a.poi_id.cmp(&b.poi_id));

    let hexes = pois
        .iter()
        .map(|p| Ok(CellId::leaf(&p.location()?)?.to_hex()))
        .collect::<Result<Vec<String>, SidError>>()?;
    let mut lcp = shared_hex_prefix(&hexes)?;
    // A catalog occupying one leaf cell has nothing to strip against; keep the trailing 2B digits.
    if hexes.iter().all(|h| h == &hexes[0]) {
        lcp.truncate(hexes[0].len().saturating_sub(2 * config.geo_token_count));
    }
    let geo = hexes
        .iter()
        .map(|h| geospatial_prefix(h, lcp.len(), config.geo_token_count))
        .collect::<Result<Vec<_>, _>>()?;

    let key_of = |p: &PoiRecord| match config.embedding_key {
        EmbeddingKey::Category => p.category_name.clone(),
        EmbeddingKey::Poi => p.poi_id.clone(),
    };
    let mut vectors = Vec::with_capacity(pois.len());
    for p in &pois {
        let key = key_of(p);
        let v = embeddings
            .get(&key)
            .ok_or_else(|| SidError::MissingEmbedding {
                poi_id: p.poi_id.clone(),
                key: key.clone(),
            })?;
        vectors.push((key, v));
    }
    // Train on distinct keys so repeated categories do not reweight the codebook.
    let training: BTreeMap<&str, &[f64]> = vectors.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let training: Vec<Vec<f64>> = training.values().map(|v| v.to_vec()).collect();
    let model = RvqModel::train(
        &training,
        config.rvq_levels,
        config.rvq_codebook_size,
        config.rng_seed,
    )?;
    let semantic = vectors
        .iter()
        .map(|(_, v)| model.encode(v))
        .collect::<Result<Vec<_>, _>>()?;

    let mut groups: BTreeMap<(Vec<u8>, Vec<u16>), Vec<String>> = BTreeMap::new();
    for ((p, g), s) in pois.iter().zip(&geo).zip(&semantic) {
        groups
            .entry((g.clone(), s.clone()))
            .or_default()
            .push(p.poi_id.clone());
    }
    let suffixes = assign_suffixes(&groups).suffixes;

    let mut entries = Vec::with_capacity(pois.len());
    for (((p, hex), g), s) in pois.iter().zip(hexes).zip(geo).zip(semantic) {
        let sid = SpatialSemanticId::new(g, s, suffixes[&p.poi_id]);
        entries.push(RegistryEntry {
            poi_id: p.poi_id.clone(),
            sid,
            hex_cell_id: hex,
            location: p.location()?,
        });
    }
    let registry = SidRegistry::from_entries(config.clone(), lcp, entries)?;
    Ok((registry, model))
}
