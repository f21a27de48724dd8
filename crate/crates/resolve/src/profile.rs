//! Per-column quality profiles.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::table::{Column, DataType, Table};
use crate::{Error, Result};

pub const DEFAULT_TOP_K: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueCount {
    pub value: String,
    pub count: usize,
}

/// `values` distinct values each occur exactly `occurrences` times.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub occurrences: usize,
    pub values: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub column: String,
    pub datatype: DataType,
    pub rows: usize,
    pub null_count: usize,
    pub unique_count: usize,
    /// Most frequent values, ties broken by value ascending.
    pub top_k: Vec<ValueCount>,
    /// Ascending by `occurrences`.
    pub count_histogram: Vec<HistogramBin>,
    /// At most one distinct non-null value.
    pub constant: bool,
}

pub fn profile_column(column: &Column, k: usize) -> ColumnProfile {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut null_count = 0;
    for v in &column.values {
        match v {
            Some(v) => *counts.entry(v.as_str()).or_default() += 1,
            None => null_count += 1,
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let mut hist: HashMap<usize, usize> = HashMap::new();
    for &(_, c) in &ranked {
        *hist.entry(c).or_default() += 1;
    }
    let mut count_histogram: Vec<HistogramBin> =
        hist.into_iter().map(|(occurrences, values)| HistogramBin { occurrences, values }).collect();
    count_histogram.sort_unstable_by_key(|b| b.occurrences);
    ColumnProfile {
        column: column.name.clone(),
        datatype: column.dtype,
        rows: column.values.len(),
        null_count,
        unique_count: ranked.len(),
        top_k: ranked.iter().take(k).map(|&(value, count)| ValueCount { value: value.to_string(), count }).collect(),
        count_histogram,
        constant: ranked.len() <= 1,
    }
}

/// Profiles every column, in column order. Columns are processed in
/// parallel on the current pool.
pub fn profile(table: &Table, k: usize) -> Result<Vec<ColumnProfile>> {
    if k < 1 {
        return Err(Error::Config("top_k must be at least 1".into()));
    }
    if table.is_empty() {
        return Err(Error::Schema(format!("table {:?} has no records", table.name)));
    }
    Ok(table.columns().par_iter().map(|c| profile_column(c, k)).collect())
}

/// One JSON object per line.
pub fn write_profile<W: Write>(report: &[ColumnProfile], mut out: W) -> Result<()> {
    for p in report {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n").map_err(|e| Error::io("<profile>", e))?;
    }
    Ok(())
}
