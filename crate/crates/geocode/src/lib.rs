//! Reverse geocoding for POI catalogs: a persistent append-only cache keyed by
//! coordinates rounded to six decimals, a rate-limited HTTP client with
//! exponential-backoff retries, and an offline mode that never touches the
//! network.

mod cache;
mod client;
mod clock;
mod transport;

pub use cache::{CacheKey, GeocodeCache};
pub use client::{
    GeocodeEntry, GeocodeMode, Geocoder, GeocoderConfig, Source, WarmOutcome, WarmSummary,
    BASE_URL_ENV, DEFAULT_PATH_TEMPLATE, TOKEN_ENV,
};
pub use clock::{Clock, MockClock, SystemClock};
pub use transport::{HttpResponse, Transport, UreqTransport};

pub use geosid_core::prompt::ADDRESS_PLACEHOLDER;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeocodeError {
    #[error("cache I/O on {path}: {source}")]
    CacheIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed cache line {line} in {path}: {message}")]
    CacheFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("request to {url} failed after {attempts} attempts: {message}")]
    Transport {
        url: String,
        attempts: usize,
        message: String,
    },
    #[error("unexpected response from {url}: {message}")]
    Response { url: String, message: String },
    #[error("no endpoint configured; set {0} or run offline")]
    NoEndpoint(&'static str),
    #[error(transparent)]
    Geo(#[from] geosid_core::geo::GeoError),
}
