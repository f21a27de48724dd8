//! Core algorithms for batch entity resolution.
//!
//! Everything in this crate is pure computation over in-memory data and
//! only needs an allocator, so it builds under `no_std`. File formats, the
//! pipeline orchestration and the thread pools live in the `resolve` crate.
//!
//! The pieces, in pipeline order:
//!
//! * [`blocking`]: row expansion of list attributes and all-subsets
//!   blocking with a group size cap (`maxrow`).
//! * [`similarity`]: token and character based string measures plus the
//!   numeric ones used to build pair feature vectors.
//! * [`forest`]: a CART random forest producing match probabilities.
//! * [`matching`]: thresholds and stratified train/test splits.
//! * [`graph`]: match graph, connected components, maximal cliques and the
//!   greedy disjoint-clique extraction.
//! * [`eval`]: cluster to pair expansion and pairwise precision/recall/F1.

#![cfg_attr(not(test), no_std)]
#![cfg_attr(not(test), deny(clippy::unwrap_used))]

extern crate alloc;

pub mod bitset;
pub mod blocking;
mod error;
pub mod eval;
pub mod forest;
pub mod graph;
pub mod matching;
pub mod similarity;

pub use error::{Error, Result};

/// Identifier of a record as it appears in the input data.
pub type RecordId = u64;
