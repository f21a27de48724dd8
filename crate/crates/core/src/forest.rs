//! Random forest of CART classification trees.
//!
//! Feature matrices are row-major `f64` slices where [`MISSING`] (NaN) marks
//! a value that could not be computed. Candidate split thresholds come from
//! per-feature cut points computed once over the training matrix: every
//! midpoint between consecutive distinct values when there are at most
//! `max_bins` of them, quantile cut points otherwise.
//!
//! At each split, missing values follow the branch that received more
//! training weight. Trees vote with their leaf majority and the forest
//! probability is the fraction of trees voting "match".
//!
//! Tree `i` draws all of its randomness from a generator seeded with
//! `seed + i`, so trees can be fitted in any order or in parallel with the
//! same result.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Marker for a missing feature value.
pub const MISSING: f64 = f64::NAN;

const MISSING_BIN: u16 = u16::MAX;

#[inline]
pub fn is_missing(v: f64) -> bool {
    v.is_nan()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestParams {
    #[serde(default = "defaults::n_trees")]
    pub n_trees: usize,
    #[serde(default = "defaults::max_depth")]
    pub max_depth: usize,
    #[serde(default = "defaults::min_leaf")]
    pub min_leaf: usize,
    /// Features tried per split; `None` means `floor(sqrt(d))`.
    #[serde(default)]
    pub max_features: Option<usize>,
    #[serde(default = "defaults::max_bins")]
    pub max_bins: usize,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn n_trees() -> usize {
        100
    }
    pub fn max_depth() -> usize {
        12
    }
    pub fn min_leaf() -> usize {
        5
    }
    pub fn max_bins() -> usize {
        255
    }
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: defaults::n_trees(),
            max_depth: defaults::max_depth(),
            min_leaf: defaults::min_leaf(),
            max_features: None,
            max_bins: defaults::max_bins(),
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if self.n_trees == 0 {
            return bad("n_trees", "must be positive");
        }
        if self.max_depth == 0 {
            return bad("max_depth", "must be positive");
        }
        if self.min_leaf == 0 {
            return bad("min_leaf", "must be positive");
        }
        if self.max_features == Some(0) {
            return bad("max_features", "must be positive");
        }
        if !(2..=(MISSING_BIN as usize - 1)).contains(&self.max_bins) {
            return bad("max_bins", "must lie in [2, 65534]");
        }
        Ok(())
    }

    pub fn features_per_split(&self, n_features: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| libm::floor(libm::sqrt(n_features as f64)) as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        vote: bool,
    },
    Split {
        feature: u32,
        threshold: f64,
        missing_left: bool,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn vote(&self, row: &[f64]) -> bool {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { vote } => return *vote,
                Node::Split { feature, threshold, missing_left, left, right } => {
                    let v = row[*feature as usize];
                    let go_left = if is_missing(v) { *missing_left } else { v <= *threshold };
                    i = if go_left { *left } else { *right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Anything that turns a feature row into a match probability.
pub trait PairClassifier {
    fn n_features(&self) -> usize;
    fn predict_proba(&self, row: &[f64]) -> f64;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: ForestParams,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl PairClassifier for RandomForest {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_proba(&self, row: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.vote(row)).count();
        votes as f64 / self.trees.len() as f64
    }
}

/// Training matrix with every value replaced by its bin index.
#[derive(Clone, Debug)]
pub struct BinnedMatrix {
    n_rows: usize,
    n_features: usize,
    /// `cuts[f]` ascending; bin `k` holds values in `(cuts[k-1], cuts[k]]`.
    cuts: Vec<Vec<f64>>,
    /// Column-major bin indices.
    bins: Vec<u16>,
    /// Row-major raw values.
    raw: Vec<f64>,
}

impl BinnedMatrix {
    pub fn new(rows: &[f64], n_features: usize, max_bins: usize) -> Result<Self> {
        if n_features == 0 || rows.len() % n_features != 0 {
            return Err(Error::LayoutMismatch { expected: n_features, found: rows.len() });
        }
        let n_rows = rows.len() / n_features;
        let mut cuts = Vec::with_capacity(n_features);
        let mut bins = Vec::with_capacity(rows.len());
        for f in 0..n_features {
            let column = rows.iter().skip(f).step_by(n_features).copied();
            let mut values: Vec<f64> = column.clone().filter(|v| !is_missing(*v)).collect();
            values.sort_unstable_by(f64::total_cmp);
            let c = cut_points(&values, max_bins);
            bins.extend(column.map(|v| {
                if is_missing(v) {
                    MISSING_BIN
                } else {
                    c.partition_point(|&cut| cut < v) as u16
                }
            }));
            cuts.push(c);
        }
        Ok(Self { n_rows, n_features, cuts, bins, raw: rows.to_vec() })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    fn bin(&self, row: usize, feature: usize) -> u16 {
        self.bins[feature * self.n_rows + row]
    }
}

fn cut_points(sorted: &[f64], max_bins: usize) -> Vec<f64> {
    let mut distinct: Vec<f64> = sorted.to_vec();
    distinct.dedup();
    if distinct.len() <= max_bins {
        return distinct.windows(2).map(|w| midpoint(w[0], w[1])).collect();
    }
    let n = sorted.len();
    let mut cuts: Vec<f64> = Vec::with_capacity(max_bins);
    for k in 1..max_bins {
        let v = sorted[k * n / max_bins - 1];
        let next = sorted.partition_point(|&x| x <= v);
        if next < n {
            let c = midpoint(v, sorted[next]);
            if cuts.last() != Some(&c) {
                cuts.push(c);
            }
        }
    }
    cuts
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // Keep the cut strictly below `b` so `b` lands in the upper bin.
    if m < b {
        m
    } else {
        a
    }
}

/// One fitted tree together with its out-of-bag votes.
#[derive(Clone, Debug)]
pub struct FittedTree {
    pub tree: Tree,
    pub oob: Vec<(u32, bool)>,
}

/// Out-of-bag accuracy summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OobReport {
    pub accuracy: f64,
    /// Rows that were out of bag for at least one tree.
    pub rows_scored: usize,
}

pub fn check_labels(labels: &[bool]) -> Result<()> {
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Fits tree number `tree_index`.
pub fn fit_tree(data: &BinnedMatrix, labels: &[bool], params: &ForestParams, tree_index: usize) -> FittedTree {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(tree_index as u64));
    let n = data.n_rows;
    let mut weight = vec![0u32; n];
    for _ in 0..n {
        weight[rng.random_range(0..n)] += 1;
    }
    let mut samples: Vec<u32> = (0..n as u32).filter(|&i| weight[i as usize] > 0).collect();

    let mut builder = TreeBuilder {
        data,
        labels,
        weight: &weight,
        params,
        mtry: params.features_per_split(data.n_features),
        features: (0..data.n_features).collect(),
        nodes: Vec::new(),
        rng,
    };
    builder.grow(&mut samples);
    let tree = Tree { nodes: builder.nodes };

    let oob = (0..n)
        .filter(|&i| weight[i] == 0)
        .map(|i| (i as u32, tree.vote(&data.raw[i * data.n_features..(i + 1) * data.n_features])))
        .collect();
    FittedTree { tree, oob }
}

/// Combines fitted trees (in tree-index order) into a forest and scores
/// the out-of-bag votes.
pub fn assemble(
    params: ForestParams,
    n_features: usize,
    labels: &[bool],
    fitted: Vec<FittedTree>,
) -> (RandomForest, OobReport) {
    let mut votes = vec![(0u32, 0u32); labels.len()];
    for f in &fitted {
        for &(row, vote) in &f.oob {
            let v = &mut votes[row as usize];
            v.0 += u32::from(vote);
            v.1 += 1;
        }
    }
    let mut scored = 0usize;
    let mut correct = 0usize;
    for (v, &label) in votes.iter().zip(labels) {
        if v.1 == 0 {
            continue;
        }
        scored += 1;
        let predicted = 2 * v.0 >= v.1;
        correct += usize::from(predicted == label);
    }
    let accuracy = if scored == 0 { f64::NAN } else { correct as f64 / scored as f64 };
    let trees = fitted.into_iter().map(|f| f.tree).collect();
    (RandomForest { params, n_features, trees }, OobReport { accuracy, rows_scored: scored })
}

/// Single-threaded training.
pub fn fit(rows: &[f64], n_features: usize, labels: &[bool], params: &ForestParams) -> Result<(RandomForest, OobReport)> {
    params.validate()?;
    let data = BinnedMatrix::new(rows, n_features, params.max_bins)?;
    if data.n_rows != labels.len() {
        return Err(Error::LayoutMismatch { expected: labels.len(), found: data.n_rows });
    }
    check_labels(labels)?;
    let fitted = (0..params.n_trees).map(|i| fit_tree(&data, labels, params, i)).collect();
    Ok(assemble(params.clone(), n_features, labels, fitted))
}

struct TreeBuilder<'a> {
    data: &'a BinnedMatrix,
    labels: &'a [bool],
    weight: &'a [u32],
    params: &'a ForestParams,
    mtry: usize,
    features: Vec<usize>,
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
}

struct BestSplit {
    feature: usize,
    bin: usize,
    threshold: f64,
    missing_left: bool,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, samples: &mut [u32]) {
        // Explicit stack of (node slot, sample range, depth).
        self.nodes.push(Node::Leaf { vote: false });
        let mut stack = vec![(0usize, 0usize, samples.len(), 0usize)];
        while let Some((slot, lo, hi, depth)) = stack.pop() {
            let part = &mut samples[lo..hi];
            let (pos, neg) = self.class_weights(part);
            let vote = pos > neg;
            let total = pos + neg;
            if depth >= self.params.max_depth || pos == 0.0 || neg == 0.0 || total < 2.0 * self.params.min_leaf as f64 {
                self.nodes[slot] = Node::Leaf { vote };
                continue;
            }
            let Some(best) = self.best_split(part, pos, neg) else {
                self.nodes[slot] = Node::Leaf { vote };
                continue;
            };
            let mid = lo + self.partition(part, &best);
            let left = self.nodes.len();
            self.nodes.push(Node::Leaf { vote: false });
            self.nodes.push(Node::Leaf { vote: false });
            self.nodes[slot] = Node::Split {
                feature: best.feature as u32,
                threshold: best.threshold,
                missing_left: best.missing_left,
                left: left as u32,
                right: left as u32 + 1,
            };
            stack.push((left + 1, mid, hi, depth + 1));
            stack.push((left, lo, mid, depth + 1));
        }
    }

    fn class_weights(&self, samples: &[u32]) -> (f64, f64) {
        let mut pos = 0u64;
        let mut neg = 0u64;
        for &s in samples {
            let w = u64::from(self.weight[s as usize]);
            if self.labels[s as usize] {
                pos += w;
            } else {
                neg += w;
            }
        }
        (pos as f64, neg as f64)
    }

    fn best_split(&mut self, samples: &[u32], pos: f64, neg: f64) -> Option<BestSplit> {
        let parent = gini_mass(pos, neg);
        let min_leaf = self.params.min_leaf as f64;
        // Partial Fisher-Yates: the first `mtry` entries become the sample.
        let d = self.features.len();
        for i in 0..self.mtry {
            let j = self.rng.random_range(i..d);
            self.features.swap(i, j);
        }
        let mut best: Option<BestSplit> = None;
        let mut hist: Vec<(f64, f64)> = Vec::new();
        // Keep drawing features past `mtry` until some split is valid.
        for (tried, fi) in (0..d).enumerate() {
            if tried >= self.mtry {
                if best.is_some() {
                    break;
                }
                let j = self.rng.random_range(fi..d);
                self.features.swap(fi, j);
            }
            let f = self.features[fi];
            let n_bins = self.data.cuts[f].len() + 1;
            if n_bins < 2 {
                continue;
            }
            hist.clear();
            hist.resize(n_bins, (0.0, 0.0));
            let (mut miss_pos, mut miss_neg) = (0.0, 0.0);
            for &s in samples {
                let w = f64::from(self.weight[s as usize]);
                let label = self.labels[s as usize];
                let b = self.data.bin(s as usize, f);
                let slot = if b == MISSING_BIN { (&mut miss_pos, &mut miss_neg) } else {
                    let h = &mut hist[b as usize];
                    (&mut h.0, &mut h.1)
                };
                if label {
                    *slot.0 += w;
                } else {
                    *slot.1 += w;
                }
            }
            let (present_pos, present_neg) = (pos - miss_pos, neg - miss_neg);
            let (mut lp, mut ln) = (0.0, 0.0);
            let mut last_occupied = 0usize;
            for k in 0..n_bins - 1 {
                let h = hist[k];
                if h.0 + h.1 > 0.0 {
                    last_occupied = k;
                }
                lp += h.0;
                ln += h.1;
                // Only split right below an occupied bin; the empty bins in
                // between give the same partition.
                let next = hist[k + 1];
                if next.0 + next.1 == 0.0 {
                    continue;
                }
                let (rp, rn) = (present_pos - lp, present_neg - ln);
                let missing_left = lp + ln >= rp + rn;
                let (l_pos, l_neg, r_pos, r_neg) = if missing_left {
                    (lp + miss_pos, ln + miss_neg, rp, rn)
                } else {
                    (lp, ln, rp + miss_pos, rn + miss_neg)
                };
                if l_pos + l_neg < min_leaf || r_pos + r_neg < min_leaf {
                    continue;
                }
                let impurity = gini_mass(l_pos, l_neg) + gini_mass(r_pos, r_neg);
                if impurity < parent - 1e-12 && best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    // Any threshold between the two occupied bins splits the
                    // node the same way; take the middle of the gap.
                    let cuts = &self.data.cuts[f];
                    let threshold = if last_occupied < k {
                        midpoint(cuts[last_occupied], cuts[k])
                    } else {
                        cuts[k]
                    };
                    best = Some(BestSplit { feature: f, bin: k, threshold, missing_left, impurity });
                }
            }
        }
        best
    }

    /// Moves left-going samples to the front; returns their count.
    fn partition(&self, samples: &mut [u32], split: &BestSplit) -> usize {
        let goes_left = |s: u32| {
            let b = self.data.bin(s as usize, split.feature);
            if b == MISSING_BIN {
                split.missing_left
            } else {
                b as usize <= split.bin
            }
        };
        let (left, right): (Vec<u32>, Vec<u32>) = samples.iter().partition(|&&s| goes_left(s));
        let n = left.len();
        samples[..n].copy_from_slice(&left);
        samples[n..].copy_from_slice(&right);
        n
    }
}

/// Gini impurity scaled by node weight: `w * (1 - p^2 - q^2)`.
fn gini_mass(pos: f64, neg: f64) -> f64 {
    let w = pos + neg;
    if w == 0.0 {
        0.0
    } else {
        w - (pos * pos + neg * neg) / w
    }
}
