//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
//! stage fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::evaluate::{evaluate_clusters, read_truth};
use crate::manifest::{Manifest, StageStatus};
use crate::pipeline::{run_pipeline_until, PipelineError};
use crate::synth::{generate_synthetic, write_truth, Corruption};
use crate::table::write_table;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_STAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "resolve", version, about = "Batch entity resolution over delimited files")]
pub struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to the config value, then to the core count.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Random seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Rerun stages even when their outputs are up to date.
    #[arg(long, global = true)]
    pub force: bool,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Profile the raw inputs.
    Profile,
    /// Profile, then apply cleaning rules and drop constant columns.
    Clean,
    /// Run through candidate pair generation.
    Index,
    /// Run through feature computation.
    Featurize,
    /// Run through model training.
    Train,
    /// Run through pair scoring.
    Score,
    /// Run through clustering (dedup) or thresholded matching (link).
    Cluster,
    /// Run every stage.
    Run,
    /// Compare a clusters file with truth pairs and print pairwise metrics.
    Evaluate {
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Write a synthetic person dataset with known duplicates.
    Synth {
        #[arg(long, default_value_t = 1000)]
        records: usize,
        #[arg(long, default_value_t = 0.1)]
        dup_rate: f64,
        /// light, moderate or heavy
        #[arg(long, default_value = "moderate")]
        corruption: Corruption,
    },
}

impl Command {
    fn last_stage(&self, cfg: &PipelineConfig) -> Option<&'static str> {
        Some(match self {
            Command::Profile => "profile",
            Command::Clean => "clean",
            Command::Index => "index",
            Command::Featurize => "featurize",
            Command::Train => "train",
            Command::Score => "score",
            Command::Cluster => match cfg.mode {
                crate::core::blocking::Mode::Dedup => "cluster",
                crate::core::blocking::Mode::Link => "match",
            },
            Command::Run | Command::Evaluate { .. } | Command::Synth { .. } => return None,
        })
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(PipelineError::Config(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e @ PipelineError::Stage { .. }) => {
            eprintln!("error: {e}");
            EXIT_STAGE
        }
    }
}

fn usage(e: Error) -> PipelineError {
    PipelineError::Config(e)
}

fn execute(cli: &Cli) -> std::result::Result<(), PipelineError> {
    match &cli.command {
        Command::Evaluate { clusters, truth } => {
            evaluate(clusters, truth).map_err(|source| PipelineError::Stage { stage: "evaluate", source })
        }
        Command::Synth { records, dup_rate, corruption } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            synth(&out, *records, *dup_rate, *corruption, cli.seed.unwrap_or(0)).map_err(usage)
        }
        cmd => {
            let cfg = load_config(cli).map_err(usage)?;
            let manifest = run_pipeline_until(&cfg, cli.force, cmd.last_stage(&cfg))?;
            report(&manifest, &cfg.output_dir);
            Ok(())
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli.config.as_deref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(manifest: &Manifest, dir: &Path) {
    for s in &manifest.stages {
        match s.status {
            StageStatus::Ran => println!("{:<10} ran in {:.2}s", s.stage, s.seconds),
            StageStatus::Skipped => println!("{:<10} skipped (up-to-date)", s.stage),
        }
    }
    println!("outputs in {}", dir.display());
}

fn evaluate(clusters: &Path, truth: &Path) -> Result<()> {
    let clusters = crate::cluster::read_clusters(clusters)?;
    let truth = read_truth(truth)?;
    let report = evaluate_clusters(&clusters, &truth, None)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn synth(out: &Path, records: usize, dup_rate: f64, corruption: Corruption, seed: u64) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let data = generate_synthetic(records, dup_rate, corruption, seed)?;
    write_table(&data.table, &out.join("records.csv"), b',')?;
    write_truth(&out.join("truth.csv"), &data.truth)?;
    println!("wrote {} records and {} truth pairs to {}", data.table.len(), data.truth.len(), out.display());
    Ok(())
}
