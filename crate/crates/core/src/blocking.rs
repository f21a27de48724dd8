//! All-subsets blocking over integer-encoded feature values.
//!
//! Records are first expanded into one row per combination of their
//! distinct list-attribute values. For every non-empty subset of the
//! blocking features the expanded rows are grouped by their value tuple on
//! that subset, and every group holding at most `maxrow` distinct records
//! contributes all of its record pairs. Pairs are unioned across subsets.
//!
//! Rows with a null in any column of a subset take no part in that
//! subset's groups. Group size is the number of distinct records, not
//! expanded rows.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hard cap on the number of blocking features (2^F - 1 subsets).
pub const MAX_FEATURES: usize = 16;

/// Encoded value of one feature; `None` is a null.
pub type Code = Option<u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Dedup,
    Link,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Left,
    Right,
}

/// A candidate pair of record positions.
///
/// In dedup mode both positions index the same table and `a < b`. In link
/// mode `a` indexes the left table and `b` the right one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub a: u32,
    pub b: u32,
}

impl Pair {
    /// Canonical unordered pair; `None` for a self-pair.
    pub fn unordered(x: u32, y: u32) -> Option<Pair> {
        match x.cmp(&y) {
            core::cmp::Ordering::Less => Some(Pair { a: x, b: y }),
            core::cmp::Ordering::Greater => Some(Pair { a: y, b: x }),
            core::cmp::Ordering::Equal => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockingParams {
    pub maxrow: usize,
    pub mode: Mode,
}

impl BlockingParams {
    pub fn new(maxrow: usize, mode: Mode) -> Result<Self> {
        if maxrow < 2 {
            return Err(Error::InvalidParameter {
                name: "maxrow",
                reason: alloc::format!("must be at least 2, got {maxrow}"),
            });
        }
        Ok(Self { maxrow, mode })
    }
}

/// Expanded rows stored column-wise.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpandedTable {
    n_features: usize,
    records: Vec<u32>,
    sources: Vec<Source>,
    /// `values[f][row]`
    values: Vec<Vec<Code>>,
}

impl ExpandedTable {
    pub fn new(n_features: usize) -> Self {
        Self {
            n_features,
            records: Vec::new(),
            sources: Vec::new(),
            values: vec![Vec::new(); n_features],
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, row: usize) -> u32 {
        self.records[row]
    }

    pub fn source(&self, row: usize) -> Source {
        self.sources[row]
    }

    pub fn value(&self, row: usize, feature: usize) -> Code {
        self.values[feature][row]
    }

    pub fn row(&self, row: usize) -> Vec<Code> {
        self.values.iter().map(|col| col[row]).collect()
    }

    /// Appends the cartesian expansion of one record.
    ///
    /// `per_feature[f]` holds the record's codes for feature `f`: one code
    /// for a scalar attribute, one per bound column for a list attribute.
    /// Nulls and repeated codes are dropped; a feature left with no codes
    /// contributes a single null. Returns the number of rows appended.
    pub fn push_record(&mut self, record: u32, source: Source, per_feature: &[Vec<Code>]) -> usize {
        assert_eq!(per_feature.len(), self.n_features, "feature count mismatch");
        let distinct: Vec<Vec<Code>> = per_feature
            .iter()
            .map(|codes| {
                let mut out: Vec<Code> = Vec::with_capacity(codes.len());
                for c in codes.iter().filter(|c| c.is_some()) {
                    if !out.contains(c) {
                        out.push(*c);
                    }
                }
                if out.is_empty() {
                    out.push(None);
                }
                out
            })
            .collect();
        let total: usize = distinct.iter().map(Vec::len).product();
        // Odometer over the per-feature choices; the first feature varies slowest.
        let mut idx = vec![0usize; self.n_features];
        for _ in 0..total {
            self.records.push(record);
            self.sources.push(source);
            for (f, choices) in distinct.iter().enumerate() {
                self.values[f].push(choices[idx[f]]);
            }
            for f in (0..self.n_features).rev() {
                idx[f] += 1;
                if idx[f] < distinct[f].len() {
                    break;
                }
                idx[f] = 0;
            }
        }
        total
    }
}

/// All non-empty subsets of `0..n_features`, shortest first, each length in
/// lexicographic order of feature positions.
pub fn feature_subsets(n_features: usize) -> Result<Vec<Vec<usize>>> {
    if n_features == 0 {
        return Err(Error::InvalidParameter {
            name: "features",
            reason: "at least one blocking feature is required".into(),
        });
    }
    if n_features > MAX_FEATURES {
        return Err(Error::TooManyFeatures { got: n_features, max: MAX_FEATURES });
    }
    let mut out = Vec::with_capacity((1 << n_features) - 1);
    for k in 1..=n_features {
        let mut comb: Vec<usize> = (0..k).collect();
        loop {
            out.push(comb.clone());
            // next combination in lexicographic order
            let mut i = k;
            while i > 0 && comb[i - 1] == n_features - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..k {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Pairs and counters produced for one feature subset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubsetPairs {
    /// Sorted, without duplicates.
    pub pairs: Vec<Pair>,
    pub groups: usize,
    pub skipped: usize,
    /// Largest number of pairs emitted by a single group.
    pub max_group_pairs: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexingStats {
    pub subsets_evaluated: usize,
    pub groups_per_subset: Vec<usize>,
    pub groups_skipped_over_maxrow: usize,
    pub pairs_emitted: usize,
    /// Largest number of pairs any single group contributed.
    pub max_group_pairs: usize,
}

impl IndexingStats {
    pub fn total_groups(&self) -> usize {
        self.groups_per_subset.iter().sum()
    }
}

/// Groups the expanded rows on one feature subset and emits pairs.
pub fn subset_pairs(expanded: &ExpandedTable, subset: &[usize], params: &BlockingParams) -> SubsetPairs {
    let mut rows: Vec<u32> = (0..expanded.len() as u32)
        .filter(|&r| subset.iter().all(|&f| expanded.values[f][r as usize].is_some()))
        .collect();
    let key_cmp = |x: &u32, y: &u32| {
        for &f in subset {
            let col = &expanded.values[f];
            match col[*x as usize].cmp(&col[*y as usize]) {
                core::cmp::Ordering::Equal => {}
                other => return other,
            }
        }
        core::cmp::Ordering::Equal
    };
    rows.sort_unstable_by(|x, y| {
        key_cmp(x, y)
            .then_with(|| expanded.sources[*x as usize].cmp(&expanded.sources[*y as usize]))
            .then_with(|| expanded.records[*x as usize].cmp(&expanded.records[*y as usize]))
    });

    let mut out = SubsetPairs::default();
    let mut members: Vec<(Source, u32)> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let mut end = start + 1;
        while end < rows.len() && key_cmp(&rows[start], &rows[end]).is_eq() {
            end += 1;
        }
        members.clear();
        members.extend(rows[start..end].iter().map(|&r| (expanded.sources[r as usize], expanded.records[r as usize])));
        members.dedup();
        out.groups += 1;
        if members.len() > params.maxrow {
            out.skipped += 1;
        } else {
            let before = out.pairs.len();
            emit_group_pairs(&members, params.mode, &mut out.pairs);
            out.max_group_pairs = out.max_group_pairs.max(out.pairs.len() - before);
        }
        start = end;
    }
    out.pairs.sort_unstable();
    out.pairs.dedup();
    out
}

/// `members` is sorted by (source, record) and free of duplicates.
fn emit_group_pairs(members: &[(Source, u32)], mode: Mode, pairs: &mut Vec<Pair>) {
    match mode {
        Mode::Dedup => {
            for (i, &(_, x)) in members.iter().enumerate() {
                for &(_, y) in &members[i + 1..] {
                    pairs.extend(Pair::unordered(x, y));
                }
            }
        }
        Mode::Link => {
            let split = members.partition_point(|(s, _)| *s == Source::Left);
            let (left, right) = members.split_at(split);
            for &(_, l) in left {
                for &(_, r) in right {
                    pairs.push(Pair { a: l, b: r });
                }
            }
        }
    }
}

/// Merges two sorted, duplicate-free pair lists.
pub fn merge_pairs(acc: Vec<Pair>, next: &[Pair]) -> Vec<Pair> {
    let mut out = Vec::with_capacity(acc.len() + next.len());
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < next.len() {
        match acc[i].cmp(&next[j]) {
            core::cmp::Ordering::Less => {
                out.push(acc[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(next[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                out.push(acc[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&acc[i..]);
    out.extend_from_slice(&next[j..]);
    out
}

/// Folds per-subset results (in subset order) into the final pair set.
pub fn combine_subsets<I>(results: I) -> (Vec<Pair>, IndexingStats)
where
    I: IntoIterator<Item = SubsetPairs>,
{
    let mut stats = IndexingStats::default();
    let mut pairs = Vec::new();
    for r in results {
        stats.subsets_evaluated += 1;
        stats.groups_per_subset.push(r.groups);
        stats.groups_skipped_over_maxrow += r.skipped;
        stats.max_group_pairs = stats.max_group_pairs.max(r.max_group_pairs);
        pairs = merge_pairs(pairs, &r.pairs);
    }
    stats.pairs_emitted = pairs.len();
    (pairs, stats)
}

/// Single-threaded blocking over every feature subset.
pub fn block_and_pair(expanded: &ExpandedTable, params: &BlockingParams) -> Result<(Vec<Pair>, IndexingStats)> {
    let subsets = feature_subsets(expanded.n_features())?;
    Ok(combine_subsets(subsets.iter().map(|s| subset_pairs(expanded, s, params))))
}
