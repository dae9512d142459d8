use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use geosid_core::eval::{self, EvalReport, RankedPrediction, ReportFormat};
use geosid_core::geo::GeoPoint;
use geosid_core::ingest::{self, DatasetSplit, PoiRecord};
use geosid_core::jsonl;
use geosid_core::prompt::{self, AddressBook, PromptFileRecord, PromptInputs};
use geosid_core::reward::{self, GoldLabel, RolloutRecord};
use geosid_core::sid::{self, EmbeddingTable, LcpScope, SidRegistry, MAX_OBSERVED_SUFFIXES};
use geosid_geocode::{
    GeocodeCache, GeocodeMode, Geocoder, GeocoderConfig, SystemClock, UreqTransport,
};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::stages::{self, at, require};
use crate::{Cli, Command, Invalid};

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Line-delimited `{prompt_id, completion_index, completion_text}` records.
    #[arg(long)]
    pub rollouts: PathBuf,
    /// Prompt file holding the gold labels [default: test prompts of the city].
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdvantagesArgs {
    /// Records with `prompt_id`, `completion_index` and `total` (or `reward`) [default: scores of the city].
    #[arg(long)]
    pub rewards: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Line-delimited `{prompt_id, ranked: [surface, ...]}` records. Repeat
    /// for several inference runs; their metrics are averaged.
    #[arg(long, required = true)]
    pub predictions: Vec<PathBuf>,
    /// Prompt file holding the gold labels [default: test prompts of the city].
    #[arg(long)]
    pub prompts: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<String> {
    let mut cfg = match &cli.global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => {
            let cfg = PipelineConfig::default();
            cfg.validate()?;
            cfg
        }
    };
    if let Some(dir) = &cli.global.output_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.geocode.offline |= cli.global.offline;
    let city = cli.global.city.as_deref();
    match &cli.command {
        Command::Ingest => ingest_cmd(&cfg, city),
        Command::Geocode => geocode_cmd(&cfg, city),
        Command::BuildSid => build_sid_cmd(&cfg, city),
        Command::EmitPrompts => emit_prompts_cmd(&cfg, city),
        Command::Score(args) => score_cmd(&cfg, city, args),
        Command::Advantages(args) => advantages_cmd(&cfg, city, args),
        Command::Evaluate(args) => evaluate_cmd(&cfg, city, args),
        Command::Stats => stats_cmd(&cfg, city),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn ingest_cmd(cfg: &PipelineConfig, city: Option<&str>) -> Result<String> {
    let (name, city) = cfg.city(city)?;
    let parsed = ingest::parse_checkin_file(&city.checkins, &city.column_map())?;
    let filtered = ingest::filter_min_activity(
        &parsed.checkins,
        cfg.ingest.min_activity,
        cfg.ingest.filter_mode,
    );
    let trajectories = ingest::segment_trajectories(&filtered, cfg.ingest.gap_hours);
    let split = ingest::temporal_split(trajectories, cfg.ingest.split)?;

    let dir = cfg.city_dir(name);
    create_dir(&dir)?;
    ingest::write_checkins(&at(&dir, stages::CHECKINS), &split)?;
    ingest::write_manifest(&at(&dir, stages::MANIFEST), &split)?;
    ingest::write_catalog(&at(&dir, stages::CATALOG), &split)?;
    let stats = ingest::dataset_stats(&split);
    Ok(format!(
        "ingest {name}: {} lines ({} malformed), {} check-ins kept; {} users, {} POIs, trajectories {}/{}/{} (train/valid/test), dropped {} unseen + {} short",
        parsed.total_lines,
        parsed.malformed_lines.len(),
        stats.checkins,
        stats.users,
        stats.pois,
        stats.train_trajectories,
        stats.valid_trajectories,
        stats.test_trajectories,
        split.dropped_unseen,
        split.dropped_short,
    ))
}

fn load_split(dir: &Path) -> Result<DatasetSplit> {
    let manifest = ingest::read_manifest(&require(dir, stages::MANIFEST, "ingest")?)?;
    if manifest.is_empty() {
        return Ok(DatasetSplit::default());
    }
    let checkins = ingest::read_checkins(&require(dir, stages::CHECKINS, "ingest")?)?;
    Ok(ingest::split_from_manifest(&manifest, &checkins)?)
}

fn read_catalog(dir: &Path) -> Result<Vec<PoiRecord>> {
    Ok(ingest::read_catalog(&require(
        dir,
        stages::CATALOG,
        "ingest",
    )?)?)
}

fn read_registry(dir: &Path) -> Result<SidRegistry> {
    let path = require(dir, stages::REGISTRY, "build-sid")?;
    let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    SidRegistry::read(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn read_addresses(dir: &Path) -> Result<Option<AddressBook>> {
    let path = at(dir, stages::ADDRESSES);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut book = AddressBook::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
        let (poi, address) = line.split_once('\t').ok_or_else(|| {
            Invalid(format!(
                "{} line {}: expected poi_id<TAB>address",
                path.display(),
                i + 1
            ))
        })?;
        book.insert(poi.to_string(), address.to_string());
    }
    Ok(Some(book))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn geocode_cmd(cfg: &PipelineConfig, city: Option<&str>) -> Result<String> {
    let (name, _) = cfg.city(city)?;
    let dir = cfg.city_dir(name);
    let mut catalog = read_catalog(&dir)?;
    catalog.sort_by(|a, b| a.poi_id.cmp(&b.poi_id));
    let points = catalog
        .iter()
        .map(|p| Ok((p.poi_id.as_str(), p.location()?)))
        .collect::<Result<Vec<(&str, GeoPoint)>>>()?;

    let env = GeocoderConfig::from_env();
    let settings = &cfg.geocode;
    let geo_cfg = GeocoderConfig {
        base_url: settings.base_url.clone().or(env.base_url),
        bearer_token: env.bearer_token,
        path_template: settings.path_template.clone(),
        requests_per_second: settings.requests_per_second,
        address_field: settings.address_field.clone(),
        ..GeocoderConfig::default()
    };
    let mode = if settings.offline {
        GeocodeMode::CacheOnly
    } else {
        GeocodeMode::Online
    };
    if mode == GeocodeMode::Online && geo_cfg.base_url.is_none() {
        bail!(Invalid(format!(
            "no geocoding endpoint: set geocode.base_url or {} (or pass --offline)",
            geosid_geocode::BASE_URL_ENV
        )));
    }
    create_dir(&cfg.output_dir)?;
    let cache = GeocodeCache::open(&cfg.cache_path())?;
    let mut geocoder = Geocoder::new(
        geo_cfg,
        cache,
        UreqTransport::default(),
        SystemClock::default(),
    );
    let outcome = geocoder.warm_cache(points, mode)?;
    let text: String = outcome
        .addresses
        .iter()
        .map(|(poi, a)| format!("{poi}\t{a}\n"))
        .collect();
    write_text(&at(&dir, stages::ADDRESSES), &text)?;
    let s = outcome.summary;
    Ok(format!(
        "geocode {name}: {} POIs, {} cache hits, {} fetched, {} placeholders",
        catalog.len(),
        s.hits,
        s.fetched,
        s.placeholders
    ))
}

fn load_embeddings(path: &Path, into: &mut EmbeddingTable) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading embeddings {}", path.display()))?;
    let table =
        EmbeddingTable::parse(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
    for (key, v) in table.iter() {
        match into.get(key) {
            Some(existing) if existing == v => {}
            Some(_) => bail!(Invalid(format!(
                "embedding row {key:?} differs between files"
            ))),
            None => into
                .insert(key.to_string(), v.to_vec())
                .map_err(|e| Invalid(format!("{}: {e}", path.display())))?,
        }
    }
    Ok(())
}

fn build_sid_cmd(cfg: &PipelineConfig, city: Option<&str>) -> Result<String> {
    let (name, city_cfg) = cfg.city(city)?;
    // The union scope registers every configured city under one shared vocabulary.
    let members: Vec<&str> = match cfg.sid.lcp_scope {
        LcpScope::PerDataset => vec![name],
        LcpScope::Union => cfg.cities.keys().map(String::as_str).collect(),
    };
    let mut catalog: BTreeMap<String, PoiRecord> = BTreeMap::new();
    let mut embeddings = EmbeddingTable::default();
    let mut embedding_files = BTreeSet::new();
    for member in &members {
        for poi in read_catalog(&cfg.city_dir(member))? {
            if let Some(prev) = catalog.get(&poi.poi_id) {
                if (prev.lat, prev.lng) != (poi.lat, poi.lng) {
                    bail!(Invalid(format!(
                        "POI {} has different coordinates in two cities",
                        poi.poi_id
                    )));
                }
                continue;
            }
            catalog.insert(poi.poi_id.clone(), poi);
        }
        let file = if *member == name {
            &city_cfg.embeddings
        } else {
            &cfg.cities[*member].embeddings
        };
        if embedding_files.insert(file.clone()) {
            load_embeddings(file, &mut embeddings)?;
        }
    }
    let catalog: Vec<PoiRecord> = catalog.into_values().collect();
    let mut sid_cfg = cfg.sid.clone();
    sid_cfg.rng_seed = cfg.seed;
    let registry = sid::build_registry(&catalog, &embeddings, &sid_cfg).map_err(|e| match e {
        sid::SidError::Io(m) => anyhow::Error::new(std::io::Error::other(m)),
        other => Invalid(other.to_string()).into(),
    })?;

    let classes: BTreeSet<(&[u8], &[u16])> = registry
        .entries()
        .iter()
        .map(|e| (e.sid.geo.as_slice(), e.sid.semantic.as_slice()))
        .collect();
    let max_suffix = registry
        .entries()
        .iter()
        .map(|e| e.sid.suffix)
        .max()
        .unwrap_or(0);
    if max_suffix as usize >= MAX_OBSERVED_SUFFIXES {
        warn!(
            "a (g, s) class holds {} POIs, more than the {MAX_OBSERVED_SUFFIXES} usually observed",
            max_suffix + 1
        );
    }
    let bytes = registry.to_bytes();
    for member in &members {
        let dir = cfg.city_dir(member);
        create_dir(&dir)?;
        fs::write(at(&dir, stages::REGISTRY), &bytes)
            .with_context(|| format!("writing registry in {}", dir.display()))?;
    }
    Ok(format!(
        "build-sid {}: {} POIs, shared prefix {:?}, {} (g,s) classes, largest suffix {}",
        members.join("+"),
        registry.len(),
        registry.lcp(),
        classes.len(),
        max_suffix
    ))
}

fn emit_prompts_cmd(cfg: &PipelineConfig, city: Option<&str>) -> Result<String> {
    let (name, _) = cfg.city(city)?;
    let dir = cfg.city_dir(name);
    let split = load_split(&dir)?;
    let registry = read_registry(&dir)?;
    let addresses = match read_addresses(&dir)? {
        Some(book) => book,
        None => {
            if cfg.prompt.include_addresses {
                warn!(
                    "no {} in {}; addresses render as placeholders",
                    stages::ADDRESSES,
                    dir.display()
                );
            }
            AddressBook::new()
        }
    };
    let catalog: Vec<PoiRecord> = split
        .poi_catalog
        .values()
        .map(|p| PoiRecord {
            address: addresses.get(&p.poi_id).cloned(),
            ..p.clone()
        })
        .collect();
    let inputs = PromptInputs {
        registry: &registry,
        addresses: &addresses,
        config: &cfg.prompt,
    };
    let invalid = |e: prompt::PromptError| Invalid(e.to_string());
    let alignment = prompt::emit_alignment_pairs(&registry, &catalog);
    let pretrain = prompt::emit_pretrain_examples(&split, &inputs).map_err(invalid)?;
    let valid = prompt::emit_eval_prompts(&split.valid, &split.train, &inputs).map_err(invalid)?;
    let test = prompt::emit_eval_prompts(&split.test, &split.train, &inputs).map_err(invalid)?;

    jsonl::write_file(&at(&dir, stages::ALIGNMENT), &alignment)?;
    for (file, records) in [
        (stages::PRETRAIN, &pretrain),
        (stages::VALID_PROMPTS, &valid),
        (stages::TEST_PROMPTS, &test),
    ] {
        jsonl::write_file(&at(&dir, file), records.iter().map(PromptFileRecord::from))?;
    }
    Ok(format!(
        "emit-prompts {name}: {} alignment pairs, {} training examples, {} valid and {} test prompts",
        alignment.len(),
        pretrain.len(),
        valid.len(),
        test.len()
    ))
}

/// Gold labels keyed by prompt id, with ids checked against the registry grammar.
fn gold_labels(
    prompts: &[PromptFileRecord],
    registry: &SidRegistry,
) -> Result<BTreeMap<String, GoldLabel>> {
    let mut gold = BTreeMap::new();
    for p in prompts {
        let sid = registry
            .grammar()
            .parse_exact(&p.target_sid_surface)
            .ok_or_else(|| {
                Invalid(format!(
                    "prompt {}: malformed target id {:?}",
                    p.prompt_id, p.target_sid_surface
                ))
            })?;
        let point = GeoPoint::new(p.gt_lat, p.gt_lng)
            .map_err(|e| Invalid(format!("prompt {}: {e}", p.prompt_id)))?;
        if gold
            .insert(p.prompt_id.clone(), GoldLabel { sid, point })
            .is_some()
        {
            bail!(Invalid(format!("prompt id {} appears twice", p.prompt_id)));
        }
    }
    Ok(gold)
}

fn read_prompts(path: &Path) -> Result<Vec<PromptFileRecord>> {
    prompt::read_prompt_file(path).map_err(|e| match e {
        jsonl::JsonlError::Record { .. } => Invalid(e.to_string()).into(),
        other => other.into(),
    })
}

/// Reads a line-delimited file, skipping (and reporting) lines that do not parse.
fn read_lenient<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(Vec<T>, Vec<usize>)> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (ok, bad) = jsonl::read_records_lenient(BufReader::new(file))?;
    if !bad.is_empty() {
        warn!(
            "{}: skipped {} malformed lines {:?}",
            path.display(),
            bad.len(),
            bad
        );
    }
    Ok((ok, bad))
}

fn score_cmd(cfg: &PipelineConfig, city: Option<&str>, args: &ScoreArgs) -> Result<String> {
    let (name, _) = cfg.city(city)?;
    let dir = cfg.city_dir(name);
    let registry = read_registry(&dir)?;
    let prompts_path = match &args.prompts {
        Some(p) => p.clone(),
        None => require(&dir, stages::TEST_PROMPTS, "emit-prompts")?,
    };
    let gold = gold_labels(&read_prompts(&prompts_path)?, &registry)?;
    let (rollouts, bad): (Vec<RolloutRecord>, _) = read_lenient(&args.rollouts)?;
    let mut seen = BTreeSet::new();
    for r in &rollouts {
        if !seen.insert((r.prompt_id.as_str(), r.completion_index)) {
            bail!(Invalid(format!(
                "rollout ({}, {}) appears twice",
                r.prompt_id, r.completion_index
            )));
        }
    }
    let batch = reward::score_rollouts(&rollouts, &gold, &registry, &cfg.reward);
    if batch.unmatched > 0 {
        warn!(
            "{} rollouts reference prompts missing from {}",
            batch.unmatched,
            prompts_path.display()
        );
    }
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| at(&dir, stages::SCORES));
    jsonl::write_file(&output, &batch.scores)?;
    let groups: BTreeSet<&str> = batch.scores.iter().map(|s| s.prompt_id.as_str()).collect();
    let mean = if batch.scores.is_empty() {
        0.0
    } else {
        batch.scores.iter().map(|s| s.total).sum::<f64>() / batch.scores.len() as f64
    };
    Ok(format!(
        "score {name}: {} rollouts over {} prompts, mean reward {mean:.4}, {} malformed lines skipped, {} unmatched",
        batch.scores.len(),
        groups.len(),
        bad.len(),
        batch.unmatched
    ))
}

#[derive(Debug, Deserialize)]
struct RewardLine {
    prompt_id: String,
    completion_index: u32,
    #[serde(alias = "reward")]
    total: f64,
}

#[derive(Debug, Serialize)]
struct AdvantageLine<'a> {
    prompt_id: &'a str,
    completion_index: u32,
    reward: f64,
    advantage: f64,
}

fn advantages_cmd(
    cfg: &PipelineConfig,
    city: Option<&str>,
    args: &AdvantagesArgs,
) -> Result<String> {
    let (name, _) = cfg.city(city)?;
    let dir = cfg.city_dir(name);
    let input = match &args.rewards {
        Some(p) => p.clone(),
        None => require(&dir, stages::SCORES, "score")?,
    };
    let (lines, bad): (Vec<RewardLine>, _) = read_lenient(&input)?;
    let mut groups: BTreeMap<&str, Vec<&RewardLine>> = BTreeMap::new();
    for l in &lines {
        if !l.total.is_finite() {
            bail!(Invalid(format!(
                "non-finite reward for ({}, {})",
                l.prompt_id, l.completion_index
            )));
        }
        groups.entry(&l.prompt_id).or_default().push(l);
    }
    let mut out = Vec::with_capacity(lines.len());
    for (prompt_id, mut group) in groups.iter().map(|(k, v)| (*k, v.clone())) {
        group.sort_by_key(|l| l.completion_index);
        if group
            .windows(2)
            .any(|w| w[0].completion_index == w[1].completion_index)
        {
            bail!(Invalid(format!(
                "duplicate completion index in group {prompt_id}"
            )));
        }
        let rewards: Vec<f64> = group.iter().map(|l| l.total).collect();
        let adv = reward::group_advantages(&rewards, cfg.reward.advantage_epsilon);
        out.extend(group.iter().zip(adv).map(|(l, advantage)| AdvantageLine {
            prompt_id,
            completion_index: l.completion_index,
            reward: l.total,
            advantage,
        }));
    }
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| at(&dir, stages::ADVANTAGES));
    jsonl::write_file(&output, &out)?;
    let flat = groups
        .values()
        .filter(|g| {
            reward::advantage_stats(&g.iter().map(|l| l.total).collect::<Vec<_>>()).1
                < cfg.reward.advantage_epsilon
        })
        .count();
    Ok(format!(
        "advantages {name}: {} rewards in {} groups ({flat} without variance), {} malformed lines skipped",
        out.len(),
        groups.len(),
        bad.len()
    ))
}

fn evaluate_cmd(cfg: &PipelineConfig, city: Option<&str>, args: &EvaluateArgs) -> Result<String> {
    let (name, _) = cfg.city(city)?;
    let dir = cfg.city_dir(name);
    let registry = read_registry(&dir)?;
    let prompts_path = match &args.prompts {
        Some(p) => p.clone(),
        None => require(&dir, stages::TEST_PROMPTS, "emit-prompts")?,
    };
    let prompts = read_prompts(&prompts_path)?;
    let e = &cfg.eval;
    let invalid = |e: eval::EvalError| -> anyhow::Error {
        match e {
            eval::EvalError::Io { .. } => e.into(),
            other => Invalid(other.to_string()).into(),
        }
    };

    let mut reports = Vec::with_capacity(args.predictions.len());
    for path in &args.predictions {
        let predictions: Vec<RankedPrediction> =
            jsonl::read_file(path).map_err(|err| match err {
                jsonl::JsonlError::Record { .. } => Invalid(err.to_string()).into(),
                other => anyhow::Error::from(other),
            })?;
        let records = eval::join_predictions(predictions, &prompts, &registry).map_err(invalid)?;
        reports
            .push(eval::evaluate(&records, &e.ks, &e.percentiles, e.cdf_points).map_err(invalid)?);
    }
    let report: EvalReport = if reports.len() == 1 {
        reports[0].clone()
    } else {
        for (i, r) in reports.iter().enumerate() {
            eval::write_report(
                r,
                &at(&dir, &format!("eval_report.run{}.json", i + 1)),
                ReportFormat::Json,
            )
            .map_err(invalid)?;
        }
        eval::mean_report(&reports).map_err(invalid)?
    };
    eval::write_report(&report, &at(&dir, stages::REPORT_JSON), ReportFormat::Json)
        .map_err(invalid)?;
    eval::write_report(&report, &at(&dir, stages::REPORT_CSV), ReportFormat::Csv)
        .map_err(invalid)?;
    let cdf_source = reports.last().expect("at least one run");
    eval::write_cdf_csv(cdf_source, &at(&dir, stages::CDF_CSV)).map_err(invalid)?;

    let metric = |m: &BTreeMap<usize, f64>, k: usize| {
        m.get(&k).map_or("n/a".to_string(), |v| format!("{v:.4}"))
    };
    let p50 = report
        .error_percentiles
        .get(&50)
        .map_or("n/a".to_string(), |v| format!("{v:.3} km"));
    Ok(format!(
        "evaluate {name}: {} queries over {} run(s), HR@1 {}, NDCG@5 {}, median error {p50}, {} unresolved",
        report.n_queries,
        reports.len(),
        metric(&report.hr_at, 1),
        metric(&report.ndcg_at, 5),
        report.n_unresolved
    ))
}

fn stats_cmd(cfg: &PipelineConfig, city: Option<&str>) -> Result<String> {
    let (name, _) = cfg.city(city)?;
    let split = load_split(&cfg.city_dir(name))?;
    Ok(ingest::dataset_stats(&split).to_string())
}
