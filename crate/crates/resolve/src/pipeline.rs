//! End-to-end orchestration with per-stage artifacts and a manifest.
//!
//! Stages run in order: profile, clean, encode, index, featurize, train,
//! score, then cluster (dedup) or match (link). A stage is skipped when the
//! manifest shows it ran with the same settings and inputs and its outputs
//! are unchanged on disk.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::cleaning::{apply_cleaning_rules, compile_rules, drop_constant_columns_except, ConstantColumns};
use crate::cluster::{assignments, cluster_edges, match_edges, write_clusters, write_diagnostics};
use crate::config::PipelineConfig;
use crate::core::blocking::Mode;
use crate::dictionary::encode_attribute;
use crate::features::{featurize_to_file, read_features, FeatureMatrix, FeatureSpec, Featurizer};
use crate::index::{index_dataset, write_pairs};
use crate::manifest::{hash_files, sha256_bytes, Manifest, StageRecord, StageStatus};
use crate::matcher::{normalize_labels, predict_proba, read_labels, read_scores, train, write_scores, MatchModel};
use crate::profile::{profile, write_profile};
use crate::schema::AttributeSchema;
use crate::table::{load_dataset, write_table, LoadOptions, ParseWarning, Table, DEFAULT_ID_COLUMN};
use crate::{with_workers, Error, Result};

/// Why a run stopped.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(#[source] Error),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Error,
    },
}

pub const STAGES_DEDUP: [&str; 8] = ["profile", "clean", "encode", "index", "featurize", "train", "score", "cluster"];
pub const STAGES_LINK: [&str; 8] = ["profile", "clean", "encode", "index", "featurize", "train", "score", "match"];

/// Artifact locations inside the output directory.
#[derive(Clone, Debug)]
pub struct Layout {
    pub dir: PathBuf,
    pub mode: Mode,
}

impl Layout {
    fn suffixed(&self, stem: &str, ext: &str) -> Vec<PathBuf> {
        match self.mode {
            Mode::Dedup => vec![self.dir.join(format!("{stem}.{ext}"))],
            Mode::Link => vec![self.dir.join(format!("{stem}_left.{ext}")), self.dir.join(format!("{stem}_right.{ext}"))],
        }
    }
    pub fn profiles(&self) -> Vec<PathBuf> {
        self.suffixed("profile", "jsonl")
    }
    pub fn cleaned(&self) -> Vec<PathBuf> {
        self.suffixed("cleaned", "csv")
    }
    pub fn cleaning_report(&self) -> PathBuf {
        self.dir.join("cleaning_report.json")
    }
    pub fn dictionary(&self, attribute: &str) -> PathBuf {
        self.dir.join("dictionaries").join(format!("{attribute}.csv"))
    }
    pub fn pairs(&self) -> PathBuf {
        self.dir.join("pairs.csv")
    }
    pub fn index_stats(&self) -> PathBuf {
        self.dir.join("index_stats.json")
    }
    pub fn features(&self) -> PathBuf {
        self.dir.join("features.csv")
    }
    pub fn model(&self) -> PathBuf {
        self.dir.join("model.json")
    }
    pub fn scores(&self) -> PathBuf {
        self.dir.join("scores.csv")
    }
    pub fn clusters(&self) -> PathBuf {
        self.dir.join("clusters.csv")
    }
    pub fn cluster_steps(&self) -> PathBuf {
        self.dir.join("cluster_steps.jsonl")
    }
    pub fn matches(&self) -> PathBuf {
        self.dir.join("matches.csv")
    }
}

#[derive(Serialize)]
struct CleaningReport<'a> {
    table: &'a str,
    parse_warnings: usize,
    first_parse_warnings: &'a [ParseWarning],
    rules_applied: &'a [usize],
    constant_columns: &'a ConstantColumns,
}

#[derive(Serialize)]
struct IndexReport<'a> {
    maxrow: usize,
    stats: &'a crate::core::blocking::IndexingStats,
    total_groups: usize,
    /// `maxrow * (maxrow - 1) / 2` times the number of groups.
    pair_bound: u128,
}

struct Runner {
    layout: Layout,
    manifest: Manifest,
    force: bool,
}

impl Runner {
    fn stage(
        &mut self,
        name: &'static str,
        params: &impl Serialize,
        inputs: Vec<PathBuf>,
        outputs: Vec<PathBuf>,
        body: impl FnOnce() -> Result<()>,
    ) -> std::result::Result<(), PipelineError> {
        let fail = |source| PipelineError::Stage { stage: name, source };
        let params_sha256 = sha256_bytes(&serde_json::to_vec(params).map_err(|e| fail(e.into()))?);
        let input_hashes = hash_files(&inputs).map_err(fail)?;
        if !self.force {
            if let Some(prev) = self.manifest.stage(name) {
                if prev.is_current(&params_sha256, &input_hashes, &outputs) {
                    let mut rec = prev.clone();
                    rec.status = StageStatus::Skipped;
                    rec.seconds = 0.0;
                    self.manifest.upsert(rec);
                    return self.manifest.save(&self.layout.dir).map_err(fail);
                }
            }
        }
        let start = Instant::now();
        let result = body().and_then(|_| hash_files(&outputs));
        match result {
            Ok(output_hashes) => {
                self.manifest.upsert(StageRecord {
                    stage: name.to_string(),
                    status: StageStatus::Ran,
                    params_sha256,
                    inputs: input_hashes,
                    outputs: output_hashes,
                    seconds: start.elapsed().as_secs_f64(),
                });
                self.manifest.save(&self.layout.dir).map_err(fail)
            }
            Err(e) => {
                for p in &outputs {
                    let _ = std::fs::remove_file(p);
                }
                self.manifest.stages.retain(|s| s.stage != name);
                let _ = self.manifest.save(&self.layout.dir);
                Err(fail(e))
            }
        }
    }
}

fn cleaned_options(cfg: &PipelineConfig, path: &Path) -> Result<LoadOptions> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: BTreeSet<String> = reader.headers().map_err(|e| Error::csv(path, e))?.iter().map(String::from).collect();
    Ok(LoadOptions {
        delimiter: b',',
        id_column: Some(cfg.id_column.clone().unwrap_or_else(|| DEFAULT_ID_COLUMN.to_string())),
        types: cfg.column_types.iter().filter(|(k, _)| header.contains(*k)).map(|(k, v)| (k.clone(), *v)).collect(),
    })
}

fn load_cleaned(cfg: &PipelineConfig, paths: &[PathBuf]) -> Result<Vec<Table>> {
    paths.iter().map(|p| Ok(load_dataset(p, &cleaned_options(cfg, p)?)?.table)).collect()
}

/// The configured schema, or one scalar attribute per column shared by all
/// tables.
pub fn resolve_schema(cfg: &PipelineConfig, tables: &[Table]) -> Result<AttributeSchema> {
    if !cfg.attributes.is_empty() {
        return AttributeSchema::new(cfg.attributes.clone());
    }
    let shared: Vec<crate::schema::Attribute> = tables[0]
        .columns()
        .iter()
        .filter(|c| tables.iter().all(|t| t.column(&c.name).is_ok()))
        .map(|c| crate::schema::Attribute::scalar(&c.name, &c.name))
        .collect();
    AttributeSchema::new(shared)
}

fn read_header(path: &Path, delimiter: u8) -> Result<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().delimiter(delimiter).from_path(path).map_err(|e| Error::csv(path, e))?;
    Ok(r.headers().map_err(|e| Error::csv(path, e))?.iter().map(String::from).collect())
}

/// Checks the configuration against the input headers before any stage.
fn preflight(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate()?;
    let delimiter = cfg.delimiter_byte()?;
    for input in &cfg.inputs {
        let header = read_header(input, delimiter)?;
        let has = |c: &str| header.iter().any(|h| h == c);
        let required = cfg
            .id_column
            .iter()
            .chain(cfg.column_types.keys())
            .chain(cfg.attributes.iter().flat_map(|a| a.columns.iter()))
            .chain(cfg.cleaning.iter().filter_map(|r| r.column.as_ref()));
        for c in required {
            if !has(c) {
                return Err(Error::Config(format!("{}: column {c:?} not found", input.display())));
            }
        }
        if cfg.attributes.is_empty() {
            for f in &cfg.indexing.features {
                if !has(f) {
                    return Err(Error::Config(format!("{}: blocking feature {f:?} is not a column", input.display())));
                }
            }
        }
    }
    if let Some(l) = &cfg.labels {
        if !l.is_file() {
            return Err(Error::Config(format!("labels file {} not found", l.display())));
        }
    }
    if let Some(m) = &cfg.model {
        if !m.is_file() {
            return Err(Error::Config(format!("model file {} not found", m.display())));
        }
    }
    Ok(())
}

/// Runs every stage on a pool of the configured size and returns the
/// manifest.
pub fn run_pipeline(cfg: &PipelineConfig, force: bool) -> std::result::Result<Manifest, PipelineError> {
    run_pipeline_until(cfg, force, None)
}

/// Like [`run_pipeline`], stopping after the stage named `last`.
pub fn run_pipeline_until(
    cfg: &PipelineConfig,
    force: bool,
    last: Option<&str>,
) -> std::result::Result<Manifest, PipelineError> {
    let stages = match cfg.mode {
        Mode::Dedup => STAGES_DEDUP,
        Mode::Link => STAGES_LINK,
    };
    if let Some(l) = last {
        if !stages.contains(&l) {
            return Err(PipelineError::Config(Error::Config(format!("no stage `{l}` in {} mode", mode_name(cfg.mode)))));
        }
    }
    preflight(cfg).map_err(PipelineError::Config)?;
    with_workers(cfg.workers(), || run_stages(cfg, force, last)).map_err(PipelineError::Config)?
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Dedup => "dedup",
        Mode::Link => "link",
    }
}

fn run_stages(cfg: &PipelineConfig, force: bool, last: Option<&str>) -> std::result::Result<Manifest, PipelineError> {
    let layout = Layout { dir: cfg.output_dir.clone(), mode: cfg.mode };
    std::fs::create_dir_all(layout.dir.join("dictionaries"))
        .map_err(|e| PipelineError::Config(Error::io(&layout.dir, e)))?;
    let mut manifest = Manifest::load_or_default(&layout.dir);
    manifest.stages.retain(|s| STAGES_DEDUP.contains(&s.stage.as_str()) || STAGES_LINK.contains(&s.stage.as_str()));
    let mut r = Runner { layout: layout.clone(), manifest, force };
    let load = cfg.load_options().map_err(PipelineError::Config)?;
    let inputs = cfg.inputs.clone();

    let load_raw = || -> Result<Vec<crate::table::Loaded>> { inputs.iter().map(|p| load_dataset(p, &load)).collect() };

    #[derive(Serialize)]
    struct ProfileParams<'a> {
        top_k: usize,
        delimiter: &'a str,
        id_column: &'a Option<String>,
        column_types: &'a BTreeMap<String, crate::table::DataType>,
    }
    let load_params = ProfileParams {
        top_k: cfg.profile.top_k,
        delimiter: &cfg.delimiter,
        id_column: &cfg.id_column,
        column_types: &cfg.column_types,
    };
    r.stage("profile", &load_params, inputs.clone(), layout.profiles(), || {
        for (loaded, out) in load_raw()?.iter().zip(layout.profiles()) {
            let report = profile(&loaded.table, cfg.profile.top_k)?;
            let file = std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
            write_profile(&report, std::io::BufWriter::new(file))?;
        }
        Ok(())
    })?;
    if last == Some("profile") {
        return Ok(r.manifest);
    }

    let mut clean_outputs = layout.cleaned();
    clean_outputs.push(layout.cleaning_report());
    let clean_params = (&load_params, &cfg.cleaning, &cfg.attributes, &cfg.indexing.features);
    r.stage("clean", &clean_params, inputs.clone(), clean_outputs, || {
        let rules = compile_rules(&cfg.cleaning)?;
        let protected: BTreeSet<String> = if cfg.attributes.is_empty() {
            cfg.indexing.features.iter().cloned().collect()
        } else {
            cfg.attributes.iter().flat_map(|a| a.columns.iter().cloned()).collect()
        };
        let mut reports = Vec::new();
        for (loaded, out) in load_raw()?.iter().zip(layout.cleaned()) {
            let cleaned = apply_cleaning_rules(&loaded.table, &rules)?;
            let (table, constant) = drop_constant_columns_except(&cleaned.table, &protected)?;
            write_table(&table, &out, b',')?;
            reports.push(serde_json::to_value(CleaningReport {
                table: &loaded.table.name,
                parse_warnings: loaded.warnings.len(),
                first_parse_warnings: &loaded.warnings[..loaded.warnings.len().min(100)],
                rules_applied: &cleaned.applied,
                constant_columns: &constant,
            })?);
        }
        let path = layout.cleaning_report();
        std::fs::write(&path, serde_json::to_string_pretty(&reports)? + "\n").map_err(|e| Error::io(&path, e))
    })?;
    if last == Some("clean") {
        return Ok(r.manifest);
    }

    let cleaned = layout.cleaned();
    let schema_params = (&cfg.attributes, &cfg.column_types, &cfg.id_column);
    let dict_paths: Vec<PathBuf> = cfg.indexing.features.iter().map(|f| layout.dictionary(f)).collect();
    r.stage("encode", &(&schema_params, &cfg.indexing.features), cleaned.clone(), dict_paths.clone(), || {
        let tables = load_cleaned(cfg, &cleaned)?;
        let refs: Vec<&Table> = tables.iter().collect();
        let schema = resolve_schema(cfg, &tables)?;
        for (f, path) in cfg.indexing.features.iter().zip(&dict_paths) {
            let (_, dict) = encode_attribute(&refs, schema.attribute(f)?)?;
            dict.write(path)?;
        }
        Ok(())
    })?;
    if last == Some("encode") {
        return Ok(r.manifest);
    }

    r.stage("index", &(&schema_params, &cfg.indexing), cleaned.clone(), vec![layout.pairs(), layout.index_stats()], || {
        let tables = load_cleaned(cfg, &cleaned)?;
        let refs: Vec<&Table> = tables.iter().collect();
        let schema = resolve_schema(cfg, &tables)?;
        let (cands, _) = index_dataset(&refs, &schema, &cfg.indexing)?;
        write_pairs(&layout.pairs(), cfg.mode, &cands.pairs)?;
        let m = cfg.indexing.maxrow as u128;
        let report = IndexReport {
            maxrow: cfg.indexing.maxrow,
            stats: &cands.stats,
            total_groups: cands.stats.total_groups(),
            pair_bound: m * (m - 1) / 2 * cands.stats.total_groups() as u128,
        };
        let path = layout.index_stats();
        std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&path, e))
    })?;
    if last == Some("index") {
        return Ok(r.manifest);
    }

    let mut feat_inputs = cleaned.clone();
    feat_inputs.push(layout.pairs());
    let feature_params = (&schema_params, &cfg.features);
    r.stage("featurize", &feature_params, feat_inputs, vec![layout.features()], || {
        let tables = load_cleaned(cfg, &cleaned)?;
        let schema = resolve_schema(cfg, &tables)?;
        let (left, right) = (&tables[0], &tables[tables.len() - 1]);
        let spec = FeatureSpec::from_schema(&schema, left, &cfg.features)?;
        let featurizer = Featurizer::new(&spec, &schema, left, right)?;
        let (_, pairs) = crate::index::read_pairs(&layout.pairs())?;
        featurize_to_file(&featurizer, &spec, &pairs, &layout.features())
    })?;
    if last == Some("featurize") {
        return Ok(r.manifest);
    }

    let mut train_inputs = cleaned.clone();
    train_inputs.extend(cfg.labels.iter().chain(&cfg.model).cloned());
    let train_params = (&feature_params, &cfg.matcher, cfg.seed, cfg.labels.is_some());
    r.stage("train", &train_params, train_inputs, vec![layout.model()], || {
        let tables = load_cleaned(cfg, &cleaned)?;
        let schema = resolve_schema(cfg, &tables)?;
        let (left, right) = (&tables[0], &tables[tables.len() - 1]);
        let spec = FeatureSpec::from_schema(&schema, left, &cfg.features)?;
        let model = match (&cfg.labels, &cfg.model) {
            (Some(labels), _) => {
                let labels = normalize_labels(&read_labels(labels, cfg.mode)?)?;
                let featurizer = Featurizer::new(&spec, &schema, left, right)?;
                let pairs: Vec<_> = labels.iter().map(|l| (l.id_a, l.id_b)).collect();
                let matrix = FeatureMatrix { names: spec.names(), values: featurizer.matrix(&pairs)?, pairs };
                train(&matrix, &labels, &cfg.matcher.forest_params(cfg.seed))?
            }
            (None, Some(path)) => {
                let model = MatchModel::load(path)?;
                model.check_layout(&spec.names())?;
                model
            }
            (None, None) => return Err(Error::Config("no model: supply labels or a trained model".into())),
        };
        model.save(&layout.model())
    })?;
    if last == Some("train") {
        return Ok(r.manifest);
    }

    r.stage("score", &(), vec![layout.features(), layout.model()], vec![layout.scores()], || {
        let model = MatchModel::load(&layout.model())?;
        let matrix = read_features(&layout.features())?;
        write_scores(&layout.scores(), &predict_proba(&model, &matrix)?)
    })?;
    if last == Some("score") {
        return Ok(r.manifest);
    }

    match cfg.mode {
        Mode::Dedup => {
            let mut inputs = vec![layout.scores()];
            inputs.extend(cleaned.iter().cloned());
            let params = (cfg.threshold, &cfg.clustering);
            r.stage("cluster", &params, inputs, vec![layout.clusters(), layout.cluster_steps()], || {
                let scores = read_scores(&layout.scores())?;
                let clustering = cluster_edges(&match_edges(&scores, cfg.threshold)?, cfg.clustering.component_limit)?;
                let tables = load_cleaned(cfg, &cleaned)?;
                let rows = assignments(&clustering, tables[0].ids())?;
                write_clusters(&layout.clusters(), &rows)?;
                write_diagnostics(&layout.cluster_steps(), &clustering)
            })?;
        }
        Mode::Link => {
            r.stage("match", &cfg.threshold, vec![layout.scores()], vec![layout.matches()], || {
                let scores = read_scores(&layout.scores())?;
                let kept = crate::core::matching::apply_threshold(&scores, cfg.threshold)?;
                write_scores(&layout.matches(), &kept)
            })?;
        }
    }
    Ok(r.manifest)
}
