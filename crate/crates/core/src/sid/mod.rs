//! Hierarchical spatial-semantic POI identifiers.
//!
//! An id is `[g; s; u]`: `g` is read from the hex digits of the POI's leaf
//! S2 cell after the catalog-wide shared prefix is stripped, `s` is the
//! residual quantization code of the POI's category embedding, and `u`
//! numbers POIs that collide on `(g, s)`.

mod embeddings;
mod id;
mod prefix;
mod registry;
mod rvq;
mod trie;

pub use embeddings::EmbeddingTable;
pub use id::{
    parse_sid, render_sid, SidGrammar, SidParseError, SidShape, SidToken, Slot, SpatialSemanticId,
    GEO_LETTERS, SEMANTIC_LETTERS, SUFFIX_LETTER,
};
pub use prefix::{geospatial_prefix, shared_hex_prefix};
pub use registry::{
    assign_suffixes, build_registry, build_registry_with_model, EmbeddingKey, LcpScope,
    RegistryEntry, RegistryHeader, SidConfig, SidRegistry, SuffixAssignment, MAX_OBSERVED_SUFFIXES,
};
pub use rvq::{RvqModel, MAX_LLOYD_ITERATIONS, RELATIVE_TOLERANCE};
pub use trie::SidTrie;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SidError {
    #[error("empty catalog or embedding set")]
    EmptyCatalog,
    #[error(
        "shared prefix of {lcp_len} digits leaves {available} hex digits but {geo_tokens} geo tokens need {}; \
         use a smaller geo token count or a narrower prefix scope",
        2 * geo_tokens
    )]
    PrefixTooLong {
        lcp_len: usize,
        geo_tokens: usize,
        available: usize,
    },
    #[error("invalid hex cell id {0:?}")]
    InvalidHex(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding error: {0}")]
    Embedding(String),
    #[error("no embedding row for {key:?} (poi {poi_id})")]
    MissingEmbedding { poi_id: String, key: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("registry is not bijective: {0}")]
    NotBijective(String),
    #[error("registry file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Parse(#[from] SidParseError),
    #[error(transparent)]
    Geo(#[from] crate::geo::GeoError),
    #[error("i/o error: {0}")]
    Io(String),
}
