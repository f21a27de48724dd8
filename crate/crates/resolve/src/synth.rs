//! Synthetic person records with planted duplicates.
//!
//! Base records carry a first and last name, a date of birth, one to three
//! phones and one or two addresses. Each duplicate copies a random base
//! record and applies seeded corruptions: a typo, a name swap, a phone
//! change, an address move or a dropped field.

use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::RecordId;
use crate::schema::{Attribute, AttributeSchema};
use crate::table::{Column, DataType, Table};
use crate::{Error, Result};

const SYLLABLES: &[&str] = &[
    "al", "an", "ar", "ba", "be", "bo", "ca", "ce", "da", "de", "di", "do", "el", "en", "er", "fa", "ga", "go", "ha",
    "he", "is", "ja", "jo", "ka", "ke", "ki", "la", "le", "li", "lo", "ma", "me", "mi", "mo", "na", "ne", "ni", "no",
    "or", "pa", "ra", "re", "ri", "ro", "sa", "se", "ta", "te", "to", "va", "ve", "wi", "ya", "za",
];
const SURNAME_ENDINGS: &[&str] = &["", "", "son", "er", "ez", "ski", "ton", "ley", "man", "ford"];
const STREET_SUFFIXES: &[&str] = &["St", "Ave", "Rd", "Ln", "Dr", "Ct", "Blvd", "Way", "Pl", "Ter"];
const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

pub const COLUMNS: [&str; 8] =
    ["first_name", "last_name", "dob", "phone_1", "phone_2", "phone_3", "address_1", "address_2"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    Light,
    #[default]
    Moderate,
    Heavy,
}

impl Corruption {
    /// Corruptions applied to each duplicate.
    pub fn edits(self) -> usize {
        match self {
            Corruption::Light => 1,
            Corruption::Moderate => 2,
            Corruption::Heavy => 4,
        }
    }
}

impl FromStr for Corruption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "light" => Ok(Corruption::Light),
            "moderate" => Ok(Corruption::Moderate),
            "heavy" => Ok(Corruption::Heavy),
            _ => Err(Error::Config(format!("unknown corruption profile {s:?} (light, moderate or heavy)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synthetic {
    pub table: Table,
    /// Canonical pairs of records describing the same person, sorted.
    pub truth: Vec<(RecordId, RecordId)>,
}

/// Schema of the generated table: names and birth date as scalars, phones
/// and addresses as list attributes.
pub fn synthetic_schema() -> AttributeSchema {
    AttributeSchema::new(vec![
        Attribute::scalar("first_name", "first_name"),
        Attribute::scalar("last_name", "last_name"),
        Attribute::scalar("dob", "dob"),
        Attribute::list("phones", &["phone_1", "phone_2", "phone_3"]),
        Attribute::list("addresses", &["address_1", "address_2"]),
    ])
    .expect("static schema is valid")
}

#[derive(Clone, Debug)]
struct Person {
    first: Option<String>,
    last: Option<String>,
    dob: Option<String>,
    phones: Vec<String>,
    addresses: Vec<String>,
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
}

fn word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    (0..syllables).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect()
}

fn phone(rng: &mut ChaCha8Rng) -> String {
    format!("{}{:03}{:04}", rng.random_range(200..1000), rng.random_range(0..1000), rng.random_range(0..10_000))
}

fn address(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} {} {}",
        rng.random_range(1..10_000),
        capitalize(&word(rng, 2)),
        STREET_SUFFIXES.choose(rng).expect("non-empty")
    )
}

fn dob(rng: &mut ChaCha8Rng) -> String {
    format!("{}-{:02}-{:02}", rng.random_range(1930..2006), rng.random_range(1..13), rng.random_range(1..29))
}

fn typo(rng: &mut ChaCha8Rng, s: &str) -> String {
    let mut c: Vec<char> = s.chars().collect();
    if c.len() < 2 {
        c.push(LETTERS[rng.random_range(0..LETTERS.len())] as char);
        return c.into_iter().collect();
    }
    let i = rng.random_range(0..c.len());
    let letter = LETTERS[rng.random_range(0..LETTERS.len())] as char;
    match rng.random_range(0..4) {
        0 => c[i] = letter,
        1 => c.insert(i, letter),
        2 => {
            c.remove(i);
        }
        _ => {
            let j = if i + 1 < c.len() { i + 1 } else { i - 1 };
            c.swap(i, j);
        }
    }
    c.into_iter().collect()
}

impl Person {
    fn random(rng: &mut ChaCha8Rng, surnames: &[String]) -> Self {
        let n_phones = match rng.random_range(0..10) {
            0..5 => 1,
            5..8 => 2,
            _ => 3,
        };
        let n_addresses = if rng.random_bool(0.7) { 1 } else { 2 };
        Person {
            first: Some(capitalize(&word(rng, 2))),
            last: Some(surnames.choose(rng).expect("non-empty").clone()),
            dob: Some(dob(rng)),
            phones: (0..n_phones).map(|_| phone(rng)).collect(),
            addresses: (0..n_addresses).map(|_| address(rng)).collect(),
        }
    }

    fn corrupt(&mut self, rng: &mut ChaCha8Rng) {
        match rng.random_range(0..5) {
            0 => {
                let target = if rng.random_bool(0.5) { &mut self.first } else { &mut self.last };
                if let Some(v) = target {
                    *v = typo(rng, v);
                }
            }
            1 => std::mem::swap(&mut self.first, &mut self.last),
            2 => {
                if self.phones.is_empty() || (self.phones.len() < 3 && rng.random_bool(0.3)) {
                    self.phones.push(phone(rng));
                } else {
                    let i = rng.random_range(0..self.phones.len());
                    self.phones[i] = phone(rng);
                }
            }
            3 => {
                if self.addresses.len() < 2 && rng.random_bool(0.5) {
                    self.addresses.insert(0, address(rng));
                } else if self.addresses.is_empty() {
                    self.addresses.push(address(rng));
                } else {
                    let i = rng.random_range(0..self.addresses.len());
                    self.addresses[i] = address(rng);
                }
            }
            _ => match rng.random_range(0..4) {
                0 => self.first = None,
                1 => self.dob = None,
                2 if self.phones.len() > 1 => {
                    let i = rng.random_range(0..self.phones.len());
                    self.phones.remove(i);
                }
                _ if self.addresses.len() > 1 => {
                    self.addresses.pop();
                }
                _ => self.dob = None,
            },
        }
    }
}

/// Generates `n` base records plus `ceil(n * dup_rate)` corrupted
/// duplicates. Record ids are row numbers; duplicates follow the base
/// records. The truth set holds every base-duplicate pair and every pair
/// of duplicates of the same base.
pub fn generate_synthetic(n: usize, dup_rate: f64, corruption: Corruption, seed: u64) -> Result<Synthetic> {
    if n < 10 {
        return Err(Error::Config(format!("synthetic data needs at least 10 base records, got {n}")));
    }
    if !(0.0..=0.5).contains(&dup_rate) {
        return Err(Error::Config(format!("dup_rate must lie in [0, 0.5], got {dup_rate}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let surname_pool = (n / 4).max(50);
    let surnames: Vec<String> = (0..surname_pool)
        .map(|_| {
            let len = rng.random_range(2..4);
            capitalize(&(word(&mut rng, len) + SURNAME_ENDINGS.choose(&mut rng).expect("non-empty")))
        })
        .collect();
    let mut people: Vec<Person> = (0..n).map(|_| Person::random(&mut rng, &surnames)).collect();
    // Some base records share a household address with an earlier one.
    for i in 1..n {
        if rng.random_bool(0.03) {
            let j = rng.random_range(0..i);
            if let Some(a) = people[j].addresses.first().cloned() {
                people[i].addresses[0] = a;
                let last = people[j].last.clone();
                people[i].last = last;
            }
        }
    }
    let n_dups = (n as f64 * dup_rate).ceil() as usize;
    let mut groups: Vec<Vec<RecordId>> = vec![Vec::new(); n];
    for d in 0..n_dups {
        let base = rng.random_range(0..n);
        let mut p = people[base].clone();
        for _ in 0..corruption.edits() {
            p.corrupt(&mut rng);
        }
        people.push(p);
        groups[base].push((n + d) as RecordId);
    }

    let mut truth = Vec::new();
    for (base, dups) in groups.iter().enumerate() {
        let mut members = vec![base as RecordId];
        members.extend(dups);
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                truth.push((a, b));
            }
        }
    }
    truth.sort_unstable();

    let mut cols: Vec<Vec<Option<String>>> = vec![Vec::with_capacity(people.len()); COLUMNS.len()];
    for p in people {
        cols[0].push(p.first);
        cols[1].push(p.last);
        cols[2].push(p.dob);
        for k in 0..3 {
            cols[3 + k].push(p.phones.get(k).cloned());
        }
        for k in 0..2 {
            cols[6 + k].push(p.addresses.get(k).cloned());
        }
    }
    let columns = COLUMNS.iter().zip(cols).map(|(name, values)| Column::new(*name, DataType::Text, values)).collect();
    Ok(Synthetic { table: Table::with_sequential_ids("synthetic", columns)?, truth })
}

/// Writes `id_a,id_b` truth pairs.
pub fn write_truth(path: &std::path::Path, truth: &[(RecordId, RecordId)]) -> Result<()> {
    crate::index::write_pairs(path, crate::core::blocking::Mode::Dedup, truth)
}
