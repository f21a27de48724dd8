#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resolve::matcher::{write_labels, Label};
use resolve::synth::{generate_synthetic, write_truth, Corruption};
use resolve::table::write_table;

pub const SCHEMA_TOML: &str = r#"
[[attributes]]
name = "first_name"
columns = ["first_name"]

[[attributes]]
name = "last_name"
columns = ["last_name"]

[[attributes]]
name = "dob"
columns = ["dob"]

[[attributes]]
name = "phones"
kind = "list"
columns = ["phone_1", "phone_2", "phone_3"]

[[attributes]]
name = "addresses"
kind = "list"
columns = ["address_1", "address_2"]
"#;

/// Writes records, truth, labels and a config into `dir`; returns the
/// config path. Labels are every truth pair plus as many random non-matches.
pub fn synthetic_project(dir: &Path, n: usize, dup_rate: f64, seed: u64, extra: &str) -> PathBuf {
    let data = generate_synthetic(n, dup_rate, Corruption::Moderate, seed).unwrap();
    write_table(&data.table, &dir.join("records.csv"), b',').unwrap();
    write_truth(&dir.join("truth.csv"), &data.truth).unwrap();
    let truth: BTreeSet<_> = data.truth.iter().copied().collect();
    let mut labels: Vec<Label> = data.truth.iter().map(|&(a, b)| Label { id_a: a, id_b: b, is_match: true }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = data.table.len() as u64;
    let mut negatives = BTreeSet::new();
    while negatives.len() < labels.len().max(20) {
        let (a, b) = (rng.random_range(0..total), rng.random_range(0..total));
        let p = (a.min(b), a.max(b));
        if a != b && !truth.contains(&p) {
            negatives.insert(p);
        }
    }
    labels.extend(negatives.into_iter().map(|(a, b)| Label { id_a: a, id_b: b, is_match: false }));
    write_labels(&dir.join("labels.csv"), &labels).unwrap();
    let config = format!(
        "inputs = [\"records.csv\"]\nid_column = \"row_id\"\nlabels = \"labels.csv\"\nseed = 7\n{extra}\n{SCHEMA_TOML}\n[indexing]\nfeatures = [\"last_name\", \"dob\", \"phones\", \"addresses\"]\n\n[matcher]\nn_trees = 20\n"
    );
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    path
}
