//! Batch entity resolution over delimited files.
//!
//! The algorithms live in `resolve_core`; this crate adds tables and file
//! formats, parallel drivers for each stage, the synthetic data generator
//! and the pipeline behind the `resolve` command.

pub mod cleaning;
pub mod cli;
pub mod cluster;
pub mod config;
pub mod dictionary;
mod error;
pub mod evaluate;
pub mod features;
pub mod index;
pub mod manifest;
pub mod matcher;
pub mod pipeline;
pub mod profile;
pub mod schema;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use resolve_core as core;

/// Runs `f` on a dedicated pool with `workers` threads.
///
/// Every parallel stage produces the same output for any worker count, so
/// this only changes speed.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}
