//! Pairwise evaluation of predicted matches against ground truth.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, RecordId, Result};

/// Every within-cluster pair `(a, b)` with `a < b`, sorted. Clusters must be
/// disjoint; singletons contribute nothing.
pub fn clusters_to_pairs(clusters: &[Vec<RecordId>]) -> Result<Vec<(RecordId, RecordId)>> {
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for cluster in clusters {
        let mut members = cluster.clone();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            if !seen.insert(m) {
                return Err(Error::OverlappingClusters(m));
            }
        }
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                pairs.push((a, b));
            }
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvaluationReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        // An empty side scores 1.0 only when the other side is empty too.
        let ratio = |num: usize, den: usize, other_empty: bool| {
            if den == 0 {
                if other_empty { 1.0 } else { 0.0 }
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp, tp + fn_ == 0);
        let recall = ratio(tp, tp + fn_, tp + fp == 0);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Self { true_positives: tp, false_positives: fp, false_negatives: fn_, precision, recall, f1 }
    }
}

/// Metrics over unordered pairs, which must be canonical (`a < b`).
pub fn pairwise_metrics(predicted: &[(RecordId, RecordId)], truth: &[(RecordId, RecordId)]) -> Result<EvaluationReport> {
    for &(a, b) in predicted.iter().chain(truth) {
        if a >= b {
            return Err(Error::NonCanonicalPair(a, b));
        }
    }
    Ok(count(predicted, truth))
}

/// Metrics over ordered (left, right) pairs from record linkage.
pub fn linkage_metrics(predicted: &[(RecordId, RecordId)], truth: &[(RecordId, RecordId)]) -> EvaluationReport {
    count(predicted, truth)
}

fn count(predicted: &[(RecordId, RecordId)], truth: &[(RecordId, RecordId)]) -> EvaluationReport {
    let p: BTreeSet<_> = predicted.iter().copied().collect();
    let t: BTreeSet<_> = truth.iter().copied().collect();
    let tp = p.intersection(&t).count();
    EvaluationReport::from_counts(tp, p.len() - tp, t.len() - tp)
}
