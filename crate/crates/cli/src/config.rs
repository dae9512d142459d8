use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geosid_core::ingest::{ColumnMap, DatasetFormat, FilterMode, SplitRatios};
use geosid_core::prompt::SerializationConfig;
use geosid_core::reward::RewardConfig;
use geosid_core::sid::SidConfig;
use serde::{Deserialize, Serialize};

use crate::Invalid;

/// One dataset: raw check-ins plus the category embedding table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityConfig {
    pub checkins: PathBuf,
    pub format: DatasetFormat,
    /// Overrides the format's default column positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<ColumnMap>,
    pub embeddings: PathBuf,
}

impl CityConfig {
    pub fn column_map(&self) -> ColumnMap {
        self.columns
            .clone()
            .unwrap_or_else(|| ColumnMap::for_format(self.format))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub min_activity: usize,
    pub filter_mode: FilterMode,
    pub gap_hours: f64,
    pub split: SplitRatios,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            min_activity: 10,
            filter_mode: FilterMode::SinglePass,
            gap_hours: 24.0,
            split: SplitRatios::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeocodeSettings {
    /// Endpoint base URL; falls back to the environment when unset.
    pub base_url: Option<String>,
    pub path_template: String,
    pub requests_per_second: f64,
    pub address_field: String,
    /// Shared by all cities; relative paths resolve against `output_dir`.
    pub cache_file: PathBuf,
    pub offline: bool,
}

impl Default for GeocodeSettings {
    fn default() -> Self {
        let d = geosid_geocode::GeocoderConfig::default();
        Self {
            base_url: None,
            path_template: d.path_template,
            requests_per_second: d.requests_per_second,
            address_field: d.address_field,
            cache_file: PathBuf::from("geocode_cache.tsv"),
            offline: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub ks: Vec<usize>,
    pub percentiles: Vec<u32>,
    pub cdf_points: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        use geosid_core::eval::{DEFAULT_CDF_POINTS, DEFAULT_KS, DEFAULT_PERCENTILES};
        Self {
            ks: DEFAULT_KS.to_vec(),
            percentiles: DEFAULT_PERCENTILES.to_vec(),
            cdf_points: DEFAULT_CDF_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    /// Seeds every stochastic step; overrides `sid.rng_seed`.
    pub seed: u64,
    pub default_city: Option<String>,
    pub cities: BTreeMap<String, CityConfig>,
    pub ingest: IngestConfig,
    pub sid: SidConfig,
    pub prompt: SerializationConfig,
    pub reward: RewardConfig,
    pub geocode: GeocodeSettings,
    pub eval: EvalSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            seed: 42,
            default_city: None,
            cities: BTreeMap::new(),
            ingest: IngestConfig::default(),
            sid: SidConfig::default(),
            prompt: SerializationConfig::default(),
            reward: RewardConfig::default(),
            geocode: GeocodeSettings::default(),
            eval: EvalSettings::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads a TOML file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Invalid(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.output_dir);
        for city in cfg.cities.values_mut() {
            rebase(&mut city.checkins);
            rebase(&mut city.embeddings);
        }
        cfg.sid.rng_seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sid.validate().map_err(|e| Invalid(e.to_string()))?;
        self.reward.validate().map_err(|e| Invalid(e.to_string()))?;
        if self.ingest.min_activity < 1 {
            bail!(Invalid("ingest.min_activity must be at least 1".into()));
        }
        if !(self.ingest.gap_hours > 0.0) {
            bail!(Invalid("ingest.gap_hours must be positive".into()));
        }
        if self.eval.ks.iter().any(|&k| k < 1) {
            bail!(Invalid("eval.ks must be at least 1".into()));
        }
        if let Some(city) = &self.default_city {
            if !self.cities.contains_key(city) {
                bail!(Invalid(format!("default_city {city:?} is not configured")));
            }
        }
        Ok(())
    }

    /// Picks the city named on the command line, else the configured default,
    /// else the only city.
    pub fn city(&self, requested: Option<&str>) -> Result<(&str, &CityConfig)> {
        let name = match (requested, &self.default_city) {
            (Some(n), _) => n.to_string(),
            (None, Some(n)) => n.clone(),
            (None, None) if self.cities.len() == 1 => {
                self.cities.keys().next().cloned().unwrap_or_default()
            }
            (None, None) if self.cities.is_empty() => {
                bail!(Invalid("no [cities.*] block configured".into()))
            }
            (None, None) => bail!(Invalid("several cities configured; pass --city".into())),
        };
        self.cities
            .get_key_value(&name)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| Invalid(format!("unknown city {name:?}")).into())
    }

    /// Stage directory of one city.
    pub fn city_dir(&self, city: &str) -> PathBuf {
        self.output_dir.join(city)
    }

    pub fn cache_path(&self) -> PathBuf {
        if self.geocode.cache_file.is_absolute() {
            self.geocode.cache_file.clone()
        } else {
            self.output_dir.join(&self.geocode.cache_file)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_config_carries_the_defaults() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/pipeline.example.toml");
        let cfg = PipelineConfig::load(&path).unwrap();
        let d = PipelineConfig::default();
        assert_eq!(cfg.ingest, d.ingest);
        assert_eq!(cfg.sid, d.sid);
        assert_eq!(cfg.prompt, d.prompt);
        assert_eq!(cfg.reward, d.reward);
        assert_eq!(cfg.eval, d.eval);
        assert_eq!(cfg.cities.len(), 3);
        assert_eq!(cfg.city(None).unwrap().0, "nyc");
        assert_eq!(
            cfg.city(Some("ca")).unwrap().1.format,
            DatasetFormat::Gowalla
        );
        assert!(cfg.city(Some("paris")).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sed = 3").is_err());
        assert!(toml::from_str::<PipelineConfig>("[reward]\nalpha = 1.5").is_ok());
    }
}
