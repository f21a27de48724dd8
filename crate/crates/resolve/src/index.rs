//! Candidate pair generation over one table (dedup) or two (link).

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::blocking::{
    combine_subsets, feature_subsets, subset_pairs, BlockingParams, ExpandedTable, IndexingStats, Mode, Source,
    MAX_FEATURES,
};
use crate::core::RecordId;
use crate::dictionary::{encode_attribute, Dictionary};
use crate::schema::AttributeSchema;
use crate::table::{Table, TextWriter};
use crate::{Error, Result};

pub const DEFAULT_MAXROW: usize = 1000;

fn default_maxrow() -> usize {
    DEFAULT_MAXROW
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexingConfig {
    /// Blocking attributes, in order.
    pub features: Vec<String>,
    #[serde(default = "default_maxrow")]
    pub maxrow: usize,
}

impl IndexingConfig {
    pub fn validate(&self, schema: &AttributeSchema) -> Result<()> {
        if self.features.is_empty() || self.features.len() > MAX_FEATURES {
            return Err(Error::Config(format!(
                "indexing needs between 1 and {MAX_FEATURES} features, got {}",
                self.features.len()
            )));
        }
        if self.maxrow < 2 {
            return Err(Error::Config(format!("maxrow must be at least 2, got {}", self.maxrow)));
        }
        for (i, f) in self.features.iter().enumerate() {
            schema.attribute(f)?;
            if self.features[..i].contains(f) {
                return Err(Error::Config(format!("blocking feature {f:?} listed twice")));
            }
        }
        Ok(())
    }
}

/// Candidate pairs as record ids, sorted. In dedup mode `id_a < id_b`; in
/// link mode `id_a` is from the left table and `id_b` from the right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidates {
    pub mode: Mode,
    pub pairs: Vec<(RecordId, RecordId)>,
    pub stats: IndexingStats,
}

/// The blocking attributes of `tables` expanded into rows of shared codes.
pub fn expand_rows(tables: &[&Table], schema: &AttributeSchema, features: &[String]) -> Result<(ExpandedTable, Vec<Dictionary>)> {
    let attrs = features.iter().map(|f| schema.attribute(f)).collect::<Result<Vec<_>>>()?;
    let mut codes = Vec::with_capacity(attrs.len());
    let mut dicts = Vec::with_capacity(attrs.len());
    for a in &attrs {
        let dtypes = tables
            .iter()
            .map(|t| schema.bind(t).map(|b| b.into_iter().find(|x| x.name == a.name).map(|x| x.dtype)))
            .collect::<Result<Vec<_>>>()?;
        if dtypes.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Schema(format!("attribute {:?} has different datatypes in the two inputs", a.name)));
        }
        let (c, d) = encode_attribute(tables, a)?;
        codes.push(c);
        dicts.push(d);
    }
    let mut expanded = ExpandedTable::new(attrs.len());
    let mut per_feature: Vec<Vec<Option<u32>>> = vec![Vec::new(); attrs.len()];
    for (t, table) in tables.iter().enumerate() {
        let source = if t == 0 { Source::Left } else { Source::Right };
        for row in 0..table.len() {
            for (slot, attr_codes) in per_feature.iter_mut().zip(&codes) {
                slot.clone_from(&attr_codes[t][row]);
            }
            expanded.push_record(row as u32, source, &per_feature);
        }
    }
    Ok((expanded, dicts))
}

/// Encodes, expands and blocks. Feature subsets run in parallel on the
/// current pool; the result does not depend on the worker count.
pub fn index_dataset(tables: &[&Table], schema: &AttributeSchema, config: &IndexingConfig) -> Result<(Candidates, Vec<Dictionary>)> {
    let mode = match tables.len() {
        1 => Mode::Dedup,
        2 => Mode::Link,
        n => return Err(Error::Config(format!("indexing takes one or two tables, got {n}"))),
    };
    config.validate(schema)?;
    let (expanded, dicts) = expand_rows(tables, schema, &config.features)?;
    let params = BlockingParams::new(config.maxrow, mode)?;
    let subsets = feature_subsets(config.features.len())?;
    let results: Vec<_> = subsets.par_iter().map(|s| subset_pairs(&expanded, s, &params)).collect();
    let (positions, stats) = combine_subsets(results);
    let left = tables[0].ids();
    let right = tables[tables.len() - 1].ids();
    let mut pairs: Vec<(RecordId, RecordId)> = positions
        .par_iter()
        .map(|p| {
            let (a, b) = (left[p.a as usize], right[p.b as usize]);
            match mode {
                Mode::Dedup => (a.min(b), a.max(b)),
                Mode::Link => (a, b),
            }
        })
        .collect();
    pairs.par_sort_unstable();
    Ok((Candidates { mode, pairs, stats }, dicts))
}

pub fn pair_header(mode: Mode) -> &'static str {
    match mode {
        Mode::Dedup => "id_a,id_b",
        Mode::Link => "left_id,right_id",
    }
}

pub fn write_pairs(path: &Path, mode: Mode, pairs: &[(RecordId, RecordId)]) -> Result<()> {
    let mut w = TextWriter::create(path)?;
    w.line(pair_header(mode))?;
    let mut buf = String::new();
    for (a, b) in pairs {
        use std::fmt::Write;
        buf.clear();
        let _ = write!(buf, "{a},{b}");
        w.line(&buf)?;
    }
    w.finish()
}

/// Reads a pair file; the header tells the mode.
pub fn read_pairs(path: &Path) -> Result<(Mode, Vec<(RecordId, RecordId)>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let mode = match lines.next() {
        Some(h) if h == pair_header(Mode::Dedup) => Mode::Dedup,
        Some(h) if h == pair_header(Mode::Link) => Mode::Link,
        _ => return Err(Error::format(path, "expected header `id_a,id_b` or `left_id,right_id`")),
    };
    let mut pairs = Vec::new();
    for (i, line) in lines.enumerate() {
        pairs.push(parse_id_pair(line).ok_or_else(|| Error::format(path, format!("line {}: bad pair {line:?}", i + 2)))?);
    }
    Ok((mode, pairs))
}

pub(crate) fn parse_id_pair(line: &str) -> Option<(RecordId, RecordId)> {
    let mut it = line.split(',');
    let a = it.next()?.trim().parse().ok()?;
    let b = it.next()?.trim().parse().ok()?;
    Some((a, b))
}
