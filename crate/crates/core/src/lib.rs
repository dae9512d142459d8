//! Tooling for next-POI recommendation with hierarchical spatial-semantic ids.
//!
//! The crate covers the data side of the pipeline: check-in ingestion and
//! splitting ([`ingest`]), geodesy and S2 cells ([`geo`]), POI identifiers
//! ([`sid`]), prompt serialization ([`prompt`]), rollout rewards and group
//! advantages ([`reward`]) and offline metrics ([`eval`]).

pub mod eval;
pub mod geo;
pub mod ingest;
pub mod jsonl;
pub mod prompt;
pub mod reward;
pub mod sid;
