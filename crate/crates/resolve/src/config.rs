//! Pipeline configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cleaning::{compile_rules, RuleSpec};
use crate::core::blocking::Mode;
use crate::core::forest::ForestParams;
use crate::core::graph::DEFAULT_CLIQUE_COMPONENT_LIMIT;
use crate::features::FeatureOptions;
use crate::index::IndexingConfig;
use crate::profile::DEFAULT_TOP_K;
use crate::schema::{Attribute, AttributeSchema};
use crate::table::{DataType, LoadOptions};
use crate::{Error, Result};

fn default_mode() -> Mode {
    Mode::Dedup
}
fn default_delimiter() -> String {
    ",".into()
}
fn default_threshold() -> f64 {
    0.5
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_top_k() -> usize {
    DEFAULT_TOP_K
}
fn default_component_limit() -> usize {
    DEFAULT_CLIQUE_COMPONENT_LIMIT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// One input in dedup mode, two (left, right) in link mode.
    pub inputs: Vec<PathBuf>,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    /// Column holding record ids; row numbers are used without it.
    #[serde(default)]
    pub id_column: Option<String>,
    /// Declared column types; other columns are text.
    #[serde(default)]
    pub column_types: BTreeMap<String, DataType>,
    /// Entity attributes; without any, every column is a scalar attribute.
    #[serde(default)]
    pub attributes: Vec<Attribute>,
    #[serde(default)]
    pub cleaning: Vec<RuleSpec>,
    pub indexing: IndexingConfig,
    #[serde(default)]
    pub features: FeatureOptions,
    #[serde(default)]
    pub matcher: MatcherConfig,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Labeled pairs to train on.
    #[serde(default)]
    pub labels: Option<PathBuf>,
    /// Previously trained model, used when no labels are given.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub clustering: ClusteringConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { top_k: DEFAULT_TOP_K }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    /// Components larger than this are split before clique extraction.
    #[serde(default = "default_component_limit")]
    pub component_limit: usize,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig { component_limit: DEFAULT_CLIQUE_COMPONENT_LIMIT }
    }
}

/// Forest hyperparameters; the seed comes from the top-level `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatcherConfig {
    #[serde(default = "defaults::n_trees")]
    pub n_trees: usize,
    #[serde(default = "defaults::max_depth")]
    pub max_depth: usize,
    #[serde(default = "defaults::min_leaf")]
    pub min_leaf: usize,
    #[serde(default)]
    pub max_features: Option<usize>,
    #[serde(default = "defaults::max_bins")]
    pub max_bins: usize,
}

mod defaults {
    use crate::core::forest::ForestParams;

    pub fn n_trees() -> usize {
        ForestParams::default().n_trees
    }
    pub fn max_depth() -> usize {
        ForestParams::default().max_depth
    }
    pub fn min_leaf() -> usize {
        ForestParams::default().min_leaf
    }
    pub fn max_bins() -> usize {
        ForestParams::default().max_bins
    }
}

impl Default for MatcherConfig {
    fn default() -> Self {
        let p = ForestParams::default();
        MatcherConfig {
            n_trees: p.n_trees,
            max_depth: p.max_depth,
            min_leaf: p.min_leaf,
            max_features: p.max_features,
            max_bins: p.max_bins,
        }
    }
}

impl MatcherConfig {
    pub fn forest_params(&self, seed: u64) -> ForestParams {
        ForestParams {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            max_features: self.max_features,
            max_bins: self.max_bins,
            seed,
        }
    }
}

impl PipelineConfig {
    /// Parses and validates a config file. Relative paths are taken from
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    /// Parses and validates TOML text without touching the file system.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.inputs.iter_mut().for_each(fix);
        self.labels.iter_mut().for_each(fix);
        self.model.iter_mut().for_each(fix);
        fix(&mut self.output_dir);
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match (self.mode, self.inputs.len()) {
            (Mode::Dedup, 1) | (Mode::Link, 2) => {}
            (Mode::Dedup, n) => return bad(format!("dedup mode takes exactly one input, got {n}")),
            (Mode::Link, n) => return bad(format!("link mode requires exactly two inputs, got {n}")),
        }
        self.delimiter_byte()?;
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold must lie in [0, 1], got {}", self.threshold));
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if self.profile.top_k < 1 {
            return bad("profile.top_k must be at least 1".into());
        }
        if self.clustering.component_limit < 2 {
            return bad("clustering.component_limit must be at least 2".into());
        }
        self.matcher.forest_params(self.seed).validate()?;
        compile_rules(&self.cleaning)?;
        if !self.attributes.is_empty() {
            let schema = AttributeSchema::new(self.attributes.clone())?;
            self.indexing.validate(&schema)?;
        }
        if self.labels.is_none() && self.model.is_none() {
            return bad("no model: supply labels or a trained model".into());
        }
        if self.labels.is_some() && self.model.is_some() {
            return bad("give either `labels` or `model`, not both".into());
        }
        Ok(())
    }

    pub fn delimiter_byte(&self) -> Result<u8> {
        match self.delimiter.as_bytes() {
            [b] if b.is_ascii() && *b != b'"' && *b != b'\n' => Ok(*b),
            _ => Err(Error::Config(format!("delimiter must be a single ASCII character, got {:?}", self.delimiter))),
        }
    }

    pub fn load_options(&self) -> Result<LoadOptions> {
        Ok(LoadOptions { delimiter: self.delimiter_byte()?, id_column: self.id_column.clone(), types: self.column_types.clone() })
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}
