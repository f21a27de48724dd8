//! Training and applying the pair classifier, with its file formats.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::core::blocking::Mode;
use crate::core::forest::{assemble, check_labels, fit_tree, BinnedMatrix, ForestParams, PairClassifier, RandomForest};
use crate::core::matching::ScoredPair;
use crate::core::RecordId;
use crate::features::FeatureMatrix;
use crate::index::parse_id_pair;
use crate::table::TextWriter;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const ALGORITHM: &str = "random_forest";
pub const MISSING_POLICY: &str = "majority_direction";

/// A labeled record pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub id_a: RecordId,
    pub id_b: RecordId,
    pub is_match: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub rows: usize,
    pub positives: usize,
    pub negatives: usize,
    /// SHA-256 over feature names, pair ids, values and labels.
    pub dataset_sha256: String,
    pub oob_accuracy: Option<f64>,
    pub oob_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchModel {
    pub format_version: u32,
    pub algorithm: String,
    pub feature_names: Vec<String>,
    pub missing_policy: String,
    pub metadata: TrainingMetadata,
    pub forest: RandomForest,
}

fn dataset_hash(names: &[String], pairs: &[(RecordId, RecordId)], rows: &[f64], labels: &[bool]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update([0u8]);
    }
    for (i, &(a, b)) in pairs.iter().enumerate() {
        h.update(a.to_le_bytes());
        h.update(b.to_le_bytes());
        for v in &rows[i * names.len()..(i + 1) * names.len()] {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update([u8::from(labels[i])]);
    }
    hex::encode(h.finalize())
}

/// Sorts labels by pair and rejects pairs labeled both ways.
pub fn normalize_labels(labels: &[Label]) -> Result<Vec<Label>> {
    let mut out = labels.to_vec();
    out.sort_unstable();
    out.dedup();
    for w in out.windows(2) {
        if (w[0].id_a, w[0].id_b) == (w[1].id_a, w[1].id_b) {
            return Err(Error::Config(format!("pair ({}, {}) is labeled both match and non-match", w[0].id_a, w[0].id_b)));
        }
    }
    Ok(out)
}

/// Fits a forest on the labeled rows of `matrix`. Trees are fitted in
/// parallel; tree `i` draws from its own stream seeded with `seed + i`, so
/// the model does not depend on the worker count.
pub fn train(matrix: &FeatureMatrix, labels: &[Label], params: &ForestParams) -> Result<MatchModel> {
    params.validate()?;
    let labels = normalize_labels(labels)?;
    let width = matrix.width();
    let lookup: HashMap<(RecordId, RecordId), usize> = matrix.pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut rows = Vec::with_capacity(labels.len() * width);
    let mut pairs = Vec::with_capacity(labels.len());
    for l in &labels {
        let i = *lookup
            .get(&(l.id_a, l.id_b))
            .ok_or_else(|| Error::Layout(format!("labeled pair ({}, {}) is not in the feature matrix", l.id_a, l.id_b)))?;
        rows.extend_from_slice(matrix.row(i));
        pairs.push((l.id_a, l.id_b));
    }
    let y: Vec<bool> = labels.iter().map(|l| l.is_match).collect();
    check_labels(&y)?;
    let data = BinnedMatrix::new(&rows, width, params.max_bins)?;
    let fitted: Vec<_> = (0..params.n_trees).into_par_iter().map(|i| fit_tree(&data, &y, params, i)).collect();
    let (forest, oob) = assemble(params.clone(), width, &y, fitted);
    let positives = y.iter().filter(|&&l| l).count();
    Ok(MatchModel {
        format_version: MODEL_FORMAT_VERSION,
        algorithm: ALGORITHM.into(),
        feature_names: matrix.names.clone(),
        missing_policy: MISSING_POLICY.into(),
        metadata: TrainingMetadata {
            rows: y.len(),
            positives,
            negatives: y.len() - positives,
            dataset_sha256: dataset_hash(&matrix.names, &pairs, &rows, &y),
            oob_accuracy: oob.accuracy.is_finite().then_some(oob.accuracy),
            oob_rows: oob.rows_scored,
        },
        forest,
    })
}

impl MatchModel {
    pub fn check_layout(&self, names: &[String]) -> Result<()> {
        if names.len() != self.feature_names.len() {
            return Err(Error::Layout(format!(
                "model expects {} features, matrix has {}",
                self.feature_names.len(),
                names.len()
            )));
        }
        if let Some((i, (want, got))) = self.feature_names.iter().zip(names).enumerate().find(|(_, (w, g))| w != g) {
            return Err(Error::Layout(format!("feature {i} is {got:?}, model expects {want:?}")));
        }
        Ok(())
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        self.forest.predict_proba(row)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: MatchModel = serde_json::from_str(&text)?;
        if model.format_version != MODEL_FORMAT_VERSION || model.algorithm != ALGORITHM {
            return Err(Error::format(
                path,
                format!("unsupported model {} version {}", model.algorithm, model.format_version),
            ));
        }
        if model.forest.n_features != model.feature_names.len() {
            return Err(Error::format(path, "forest width differs from the feature list"));
        }
        Ok(model)
    }
}

/// Scores every row of `matrix` in parallel, in row order.
pub fn predict_proba(model: &MatchModel, matrix: &FeatureMatrix) -> Result<Vec<ScoredPair>> {
    model.check_layout(&matrix.names)?;
    let width = matrix.width();
    Ok(matrix
        .pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(id_a, id_b))| ScoredPair { id_a, id_b, probability: model.probability(&matrix.values[i * width..(i + 1) * width]) })
        .collect())
}

pub const SCORE_HEADER: &str = "id_a,id_b,probability";

pub fn format_score(buf: &mut String, s: &ScoredPair) {
    buf.clear();
    let _ = write!(buf, "{},{},{:.6}", s.id_a, s.id_b, s.probability);
}

pub fn write_scores(path: &Path, scores: &[ScoredPair]) -> Result<()> {
    let mut w = TextWriter::create(path)?;
    w.line(SCORE_HEADER)?;
    let mut buf = String::new();
    for s in scores {
        format_score(&mut buf, s);
        w.line(&buf)?;
    }
    w.finish()
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoredPair>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(SCORE_HEADER) {
        return Err(Error::format(path, format!("expected header `{SCORE_HEADER}`")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::format(path, format!("line {}: malformed score {line:?}", i + 2));
            let (ids, p) = line.rsplit_once(',').ok_or_else(bad)?;
            let (id_a, id_b) = parse_id_pair(ids).ok_or_else(bad)?;
            let probability: f64 = p.parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&probability) {
                return Err(bad());
            }
            Ok(ScoredPair { id_a, id_b, probability })
        })
        .collect()
}

/// Reads `id_a,id_b,label` with labels 0 or 1. In dedup mode each pair is
/// put in ascending id order.
pub fn read_labels(path: &Path, mode: Mode) -> Result<Vec<Label>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("id_a,id_b,label") {
        return Err(Error::format(path, "expected header `id_a,id_b,label`"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = || Error::format(path, format!("line {}: malformed label {line:?}", i + 2));
            let (ids, l) = line.rsplit_once(',').ok_or_else(bad)?;
            let (a, b) = parse_id_pair(ids).ok_or_else(bad)?;
            let is_match = match l.trim() {
                "1" => true,
                "0" => false,
                _ => return Err(bad()),
            };
            if mode == Mode::Dedup && a == b {
                return Err(bad());
            }
            let (id_a, id_b) = if mode == Mode::Dedup { (a.min(b), a.max(b)) } else { (a, b) };
            Ok(Label { id_a, id_b, is_match })
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &[Label]) -> Result<()> {
    let mut w = TextWriter::create(path)?;
    w.line("id_a,id_b,label")?;
    for l in labels {
        w.line(&format!("{},{},{}", l.id_a, l.id_b, u8::from(l.is_match)))?;
    }
    w.finish()
}
