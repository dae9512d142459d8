use std::collections::BTreeMap;
use std::time::Duration;

use chrono::{DateTime, Utc};
use geosid_core::geo::GeoPoint;
use log::{debug, warn};

use crate::{CacheKey, Clock, GeocodeCache, GeocodeError, Transport, ADDRESS_PLACEHOLDER};

pub const DEFAULT_PATH_TEMPLATE: &str = "/reverse?lat={lat}&lon={lng}&format=json";
/// Environment variable holding the endpoint base URL.
pub const BASE_URL_ENV: &str = "GEOSID_GEOCODE_URL";
/// Environment variable holding an optional bearer token.
pub const TOKEN_ENV: &str = "GEOSID_GEOCODE_TOKEN";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeocodeMode {
    Online,
    CacheOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Remote,
    Cache,
    Placeholder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeocodeEntry {
    pub key: CacheKey,
    pub address: String,
    pub fetched_at: DateTime<Utc>,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeocoderConfig {
    pub base_url: Option<String>,
    pub path_template: String,
    pub bearer_token: Option<String>,
    pub requests_per_second: f64,
    /// Waits before each retry; its length is the retry count.
    pub backoff: Vec<Duration>,
    /// JSON field holding the display address.
    pub address_field: String,
}

impl Default for GeocoderConfig {
    fn default() -> Self {
        Self {
            base_url: None,
            path_template: DEFAULT_PATH_TEMPLATE.to_string(),
            bearer_token: None,
            requests_per_second: 1.0,
            backoff: [1, 2, 4].into_iter().map(Duration::from_secs).collect(),
            address_field: "display_name".to_string(),
        }
    }
}

impl GeocoderConfig {
    /// Defaults with the endpoint and token taken from the environment.
    pub fn from_env() -> Self {
        let var = |name| {
            std::env::var(name)
                .ok()
                .filter(|v: &String| !v.trim().is_empty())
        };
        Self {
            base_url: var(BASE_URL_ENV),
            bearer_token: var(TOKEN_ENV),
            ..Self::default()
        }
    }

    pub fn url_for(&self, key: &CacheKey) -> Result<String, GeocodeError> {
        let base = self
            .base_url
            .as_deref()
            .ok_or(GeocodeError::NoEndpoint(BASE_URL_ENV))?;
        let path = self
            .path_template
            .replace("{lat}", &format!("{:.6}", key.lat()))
            .replace("{lng}", &format!("{:.6}", key.lng()));
        Ok(format!("{}{}", base.trim_end_matches('/'), path))
    }

    fn min_interval(&self) -> Duration {
        if self.requests_per_second > 0.0 {
            Duration::from_secs_f64(1.0 / self.requests_per_second)
        } else {
            Duration::ZERO
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WarmSummary {
    pub hits: usize,
    pub fetched: usize,
    pub placeholders: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WarmOutcome {
    pub summary: WarmSummary,
    /// Resolved address per POI id, placeholders included.
    pub addresses: BTreeMap<String, String>,
}

pub struct Geocoder<T, C> {
    config: GeocoderConfig,
    cache: GeocodeCache,
    transport: T,
    clock: C,
    last_request: Option<Duration>,
}

impl<T: Transport, C: Clock> Geocoder<T, C> {
    pub fn new(config: GeocoderConfig, cache: GeocodeCache, transport: T, clock: C) -> Self {
        Self {
            config,
            cache,
            transport,
            clock,
            last_request: None,
        }
    }

    pub fn cache(&self) -> &GeocodeCache {
        &self.cache
    }

    pub fn reverse_geocode(
        &mut self,
        p: &GeoPoint,
        mode: GeocodeMode,
    ) -> Result<GeocodeEntry, GeocodeError> {
        GeoPoint::new(p.lat, p.lng)?;
        let key = CacheKey::from_point(p);
        if let Some((address, fetched_at)) = self.cache.get(&key) {
            return Ok(GeocodeEntry {
                key,
                address: address.to_string(),
                fetched_at,
                source: Source::Cache,
            });
        }
        if mode == GeocodeMode::CacheOnly {
            return Ok(GeocodeEntry {
                key,
                address: ADDRESS_PLACEHOLDER.to_string(),
                fetched_at: DateTime::UNIX_EPOCH,
                source: Source::Placeholder,
            });
        }
        let address = self.fetch(&key)?;
        let fetched_at = self.clock.wall();
        self.cache.insert(key, &address, fetched_at)?;
        Ok(GeocodeEntry {
            key,
            address,
            fetched_at,
            source: Source::Remote,
        })
    }

    /// Resolves every POI, persisting each fetch as it completes so an
    /// interrupted run keeps its progress.
    pub fn warm_cache<'a>(
        &mut self,
        pois: impl IntoIterator<Item = (&'a str, GeoPoint)>,
        mode: GeocodeMode,
    ) -> Result<WarmOutcome, GeocodeError> {
        let mut out = WarmOutcome::default();
        for (poi_id, point) in pois {
            let entry = self.reverse_geocode(&point, mode)?;
            match entry.source {
                Source::Cache => out.summary.hits += 1,
                Source::Remote => out.summary.fetched += 1,
                Source::Placeholder => out.summary.placeholders += 1,
            }
            out.addresses.insert(poi_id.to_string(), entry.address);
        }
        Ok(out)
    }

    fn throttle(&mut self) {
        let interval = self.config.min_interval();
        if let Some(last) = self.last_request {
            let since = self.clock.elapsed().saturating_sub(last);
            if since < interval {
                self.clock.sleep(interval - since);
            }
        }
        self.last_request = Some(self.clock.elapsed());
    }

    fn fetch(&mut self, key: &CacheKey) -> Result<String, GeocodeError> {
        let url = self.config.url_for(key)?;
        let attempts = self.config.backoff.len() + 1;
        let mut last_failure = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let wait = self.config.backoff[attempt - 1];
                debug!("retrying {url} in {wait:?}: {last_failure}");
                self.clock.sleep(wait);
            }
            self.throttle();
            match self
                .transport
                .get(&url, self.config.bearer_token.as_deref())
            {
                Err(e) => last_failure = e,
                Ok(r) if r.status == 429 || r.status >= 500 => {
                    last_failure = format!("HTTP {}", r.status)
                }
                Ok(r) if r.status != 200 => {
                    return Err(GeocodeError::Response {
                        url,
                        message: format!("HTTP {}", r.status),
                    })
                }
                Ok(r) => return self.extract_address(&url, &r.body),
            }
        }
        warn!("giving up on {url}");
        Err(GeocodeError::Transport {
            url,
            attempts,
            message: last_failure,
        })
    }

    fn extract_address(&self, url: &str, body: &str) -> Result<String, GeocodeError> {
        let bad = |message: String| GeocodeError::Response {
            url: url.to_string(),
            message,
        };
        let json: serde_json::Value =
            serde_json::from_str(body).map_err(|e| bad(format!("invalid JSON: {e}")))?;
        match json
            .get(&self.config.address_field)
            .and_then(|v| v.as_str())
        {
            Some(s) if !s.trim().is_empty() => Ok(s.to_string()),
            _ => Err(bad(format!("no {:?} field", self.config.address_field))),
        }
    }
}
