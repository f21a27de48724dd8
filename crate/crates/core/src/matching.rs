//! Score thresholds and stratified train/test splitting.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, RecordId, Result};

/// A record pair with its match probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredPair {
    pub id_a: RecordId,
    pub id_b: RecordId,
    pub probability: f64,
}

/// Pairs whose probability is at least `threshold`, keeping the
/// probability as the edge weight.
pub fn apply_threshold(scores: &[ScoredPair], threshold: f64) -> Result<Vec<ScoredPair>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: alloc::format!("must lie in [0, 1], got {threshold}"),
        });
    }
    Ok(scores.iter().filter(|s| s.probability >= threshold).copied().collect())
}

/// Indices of the training and test items after a stratified split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits item indices `0..labels.len()` into train and test sets, keeping
/// the label proportions. Each stratum sends `round(ratio * size)` items to
/// training, clamped so both sides get at least one. Both index lists are
/// returned sorted.
pub fn split_train_test(labels: &[bool], ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter {
            name: "ratio",
            reason: alloc::format!("must lie strictly between 0 and 1, got {ratio}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [false, true] {
        let mut stratum: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if stratum.len() < 2 {
            return Err(Error::StratumTooSmall { label, size: stratum.len() });
        }
        stratum.shuffle(&mut rng);
        let n_train = (libm::round(ratio * stratum.len() as f64) as usize).clamp(1, stratum.len() - 1);
        train.extend_from_slice(&stratum[..n_train]);
        test.extend_from_slice(&stratum[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
