//! Pairwise evaluation against ground truth.

use std::collections::BTreeSet;
use std::path::Path;

use crate::core::eval::{clusters_to_pairs, pairwise_metrics, EvaluationReport};
use crate::core::RecordId;
use crate::index::parse_id_pair;
use crate::{Error, Result};

type PairSet = BTreeSet<(RecordId, RecordId)>;

/// Truth pairs from an `id_a,id_b` file, canonicalized.
pub fn read_truth(path: &Path) -> Result<Vec<(RecordId, RecordId)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("id_a,id_b") {
        return Err(Error::format(path, "expected header `id_a,id_b`"));
    }
    let mut pairs: Vec<(RecordId, RecordId)> = lines
        .enumerate()
        .map(|(i, l)| {
            parse_id_pair(l)
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .ok_or_else(|| Error::format(path, format!("line {}: bad pair {l:?}", i + 2)))
        })
        .collect::<Result<_>>()?;
    pairs.sort_unstable();
    pairs.dedup();
    Ok(pairs)
}

/// Metrics of clustered records against truth pairs. With `within`, only
/// pairs in that set count on either side, as when evaluating a test split.
pub fn evaluate_clusters(
    clusters: &[Vec<RecordId>],
    truth: &[(RecordId, RecordId)],
    within: Option<&PairSet>,
) -> Result<EvaluationReport> {
    let predicted = clusters_to_pairs(clusters)?;
    evaluate_pairs(&predicted, truth, within)
}

pub fn evaluate_pairs(
    predicted: &[(RecordId, RecordId)],
    truth: &[(RecordId, RecordId)],
    within: Option<&PairSet>,
) -> Result<EvaluationReport> {
    let keep = |v: &[(RecordId, RecordId)]| -> Vec<(RecordId, RecordId)> {
        let mut out: Vec<_> = v.iter().copied().filter(|p| within.is_none_or(|w| w.contains(p))).collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    Ok(pairwise_metrics(&keep(predicted), &keep(truth))?)
}
