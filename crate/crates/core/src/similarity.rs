//! String, token and numeric similarity measures.
//!
//! All measures except the two alignment scores return values in `[0, 1]`
//! with `1.0` for identical inputs. Needleman-Wunsch and Smith-Waterman
//! return raw integer alignment scores (match `+1`, mismatch `-1`, gap `-1`);
//! [`normalized_alignment`] rescales them by the longer input length.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pad character for q-gram tokenization.
pub const QGRAM_PAD: char = '#';

const WINKLER_SCALE: f64 = 0.1;
const WINKLER_MAX_PREFIX: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    Whitespace,
    /// Contiguous `q`-character substrings with `q - 1` pad characters on
    /// each side.
    Qgram(usize),
}

impl Tokenizer {
    pub fn validate(self) -> Result<Self> {
        match self {
            Tokenizer::Qgram(q) if q < 2 => Err(Error::InvalidParameter {
                name: "q",
                reason: alloc::format!("q-gram size must be at least 2, got {q}"),
            }),
            t => Ok(t),
        }
    }

    /// Short tag used in feature names, e.g. `ws` or `qgram3`.
    pub fn tag(self) -> String {
        match self {
            Tokenizer::Whitespace => String::from("ws"),
            Tokenizer::Qgram(q) => alloc::format!("qgram{q}"),
        }
    }
}

/// Splits `s` into tokens. The result is a multiset in order of appearance.
pub fn tokenize(s: &str, tokenizer: Tokenizer) -> Vec<String> {
    match tokenizer {
        Tokenizer::Whitespace => s.split_whitespace().map(String::from).collect(),
        Tokenizer::Qgram(q) => {
            if s.is_empty() || q == 0 {
                return Vec::new();
            }
            let pad = q - 1;
            let mut padded: Vec<char> = Vec::with_capacity(s.len() + 2 * pad);
            padded.extend(core::iter::repeat_n(QGRAM_PAD, pad));
            padded.extend(s.chars());
            padded.extend(core::iter::repeat_n(QGRAM_PAD, pad));
            padded.windows(q).map(|w| w.iter().collect()).collect()
        }
    }
}

/// Distinct tokens in sorted order. Token measures only look at these.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenSet(Vec<String>);

impl TokenSet {
    pub fn new(mut tokens: Vec<String>) -> Self {
        tokens.sort_unstable();
        tokens.dedup();
        TokenSet(tokens)
    }

    pub fn from_text(s: &str, tokenizer: Tokenizer) -> Self {
        Self::new(tokenize(s, tokenizer))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn intersection_len(&self, other: &TokenSet) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenMeasure {
    OverlapCoefficient,
    Dice,
    Cosine,
    Jaccard,
}

impl TokenMeasure {
    pub const ALL: [TokenMeasure; 4] = [
        TokenMeasure::OverlapCoefficient,
        TokenMeasure::Dice,
        TokenMeasure::Cosine,
        TokenMeasure::Jaccard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TokenMeasure::OverlapCoefficient => "overlap_coefficient",
            TokenMeasure::Dice => "dice",
            TokenMeasure::Cosine => "cosine",
            TokenMeasure::Jaccard => "jaccard",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StringMeasure {
    LevenshteinSim,
    Jaro,
    JaroWinkler,
    ExactMatch,
    NeedlemanWunsch,
    SmithWaterman,
    MongeElkan,
}

impl StringMeasure {
    pub const ALL: [StringMeasure; 7] = [
        StringMeasure::LevenshteinSim,
        StringMeasure::Jaro,
        StringMeasure::JaroWinkler,
        StringMeasure::ExactMatch,
        StringMeasure::NeedlemanWunsch,
        StringMeasure::SmithWaterman,
        StringMeasure::MongeElkan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StringMeasure::LevenshteinSim => "levenshtein_sim",
            StringMeasure::Jaro => "jaro",
            StringMeasure::JaroWinkler => "jaro_winkler",
            StringMeasure::ExactMatch => "exact_match",
            StringMeasure::NeedlemanWunsch => "needleman_wunsch",
            StringMeasure::SmithWaterman => "smith_waterman",
            StringMeasure::MongeElkan => "monge_elkan",
        }
    }

    /// Whether the raw score is an alignment score rather than a value in `[0, 1]`.
    pub fn is_alignment(self) -> bool {
        matches!(self, StringMeasure::NeedlemanWunsch | StringMeasure::SmithWaterman)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericMeasure {
    ExactMatch,
    AbsoluteNorm,
}

impl NumericMeasure {
    pub const ALL: [NumericMeasure; 2] = [NumericMeasure::ExactMatch, NumericMeasure::AbsoluteNorm];

    pub fn name(self) -> &'static str {
        match self {
            NumericMeasure::ExactMatch => "exact_match",
            NumericMeasure::AbsoluteNorm => "absolute_norm",
        }
    }
}

/// Any similarity measure, grouped by the kind of input it accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Token(TokenMeasure),
    String(StringMeasure),
    Numeric(NumericMeasure),
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Token(m) => m.name(),
            Measure::String(m) => m.name(),
            Measure::Numeric(m) => m.name(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Similarity of two token multisets, using distinct-token set semantics.
pub fn token_similarity(a: &[String], b: &[String], measure: Measure) -> Result<f64> {
    let Measure::Token(m) = measure else {
        return Err(Error::WrongMeasureKind(measure.name()));
    };
    Ok(token_set_similarity(
        &TokenSet::new(a.to_vec()),
        &TokenSet::new(b.to_vec()),
        m,
    ))
}

pub fn token_set_similarity(a: &TokenSet, b: &TokenSet, measure: TokenMeasure) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let inter = a.intersection_len(b) as f64;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let v = match measure {
        TokenMeasure::Jaccard => inter / (na + nb - inter),
        TokenMeasure::Dice => 2.0 * inter / (na + nb),
        TokenMeasure::Cosine => inter / libm::sqrt(na * nb),
        TokenMeasure::OverlapCoefficient => inter / na.min(nb),
    };
    v.clamp(0.0, 1.0)
}

/// Raw score of a string measure. Alignment measures return integer
/// scores, everything else lies in `[0, 1]`.
pub fn string_similarity(a: &str, b: &str, measure: Measure) -> Result<f64> {
    let Measure::String(m) = measure else {
        return Err(Error::WrongMeasureKind(measure.name()));
    };
    let ca: Vec<char> = a.chars().collect();
    let cb: Vec<char> = b.chars().collect();
    Ok(match m {
        StringMeasure::LevenshteinSim => levenshtein_similarity(&ca, &cb),
        StringMeasure::Jaro => jaro(&ca, &cb),
        StringMeasure::JaroWinkler => jaro_winkler(&ca, &cb),
        StringMeasure::ExactMatch => f64::from(u8::from(a == b)),
        StringMeasure::NeedlemanWunsch => needleman_wunsch(&ca, &cb) as f64,
        StringMeasure::SmithWaterman => smith_waterman(&ca, &cb) as f64,
        StringMeasure::MongeElkan => monge_elkan(a, b),
    })
}

/// Alignment score divided by the longer length (`1.0` when both are empty).
pub fn normalized_alignment(score: f64, len_a: usize, len_b: usize) -> f64 {
    let longest = len_a.max(len_b);
    if longest == 0 {
        1.0
    } else {
        score / longest as f64
    }
}

pub fn levenshtein_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn levenshtein_similarity<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_distance(a, b) as f64 / longest as f64
}

pub fn jaro<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_hit = vec![false; a.len()];
    let mut b_hit = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_hit[j] && b[j] == *ca {
                a_hit[i] = true;
                b_hit[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let mut half_transpositions = 0usize;
    let mut bi = b_hit.iter().enumerate().filter(|(_, &h)| h).map(|(j, _)| j);
    for (i, _) in a_hit.iter().enumerate().filter(|(_, &h)| h) {
        if let Some(j) = bi.next() {
            if a[i] != b[j] {
                half_transpositions += 1;
            }
        }
    }
    let m = matches as f64;
    let t = (half_transpositions / 2) as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

pub fn jaro_winkler<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let j = jaro(a, b);
    let prefix = a
        .iter()
        .zip(b)
        .take(WINKLER_MAX_PREFIX)
        .take_while(|(x, y)| x == y)
        .count();
    (j + prefix as f64 * WINKLER_SCALE * (1.0 - j)).min(1.0)
}

/// Global alignment score with match `+1`, mismatch `-1`, gap `-1`.
pub fn needleman_wunsch<T: PartialEq>(a: &[T], b: &[T]) -> i64 {
    let mut prev: Vec<i64> = (0..=b.len() as i64).map(|j| -j).collect();
    let mut cur = vec![0i64; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = -(i as i64 + 1);
        for (j, cb) in b.iter().enumerate() {
            let diag = prev[j] + if ca == cb { 1 } else { -1 };
            cur[j + 1] = diag.max(prev[j + 1] - 1).max(cur[j] - 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Local alignment score with match `+1`, mismatch `-1`, gap `-1`.
pub fn smith_waterman<T: PartialEq>(a: &[T], b: &[T]) -> i64 {
    let mut prev = vec![0i64; b.len() + 1];
    let mut cur = vec![0i64; b.len() + 1];
    let mut best = 0;
    for ca in a {
        cur[0] = 0;
        for (j, cb) in b.iter().enumerate() {
            let diag = prev[j] + if ca == cb { 1 } else { -1 };
            let v = diag.max(prev[j + 1] - 1).max(cur[j] - 1).max(0);
            cur[j + 1] = v;
            best = best.max(v);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    best
}

fn monge_elkan_directed(a: &[Vec<char>], b: &[Vec<char>]) -> f64 {
    let total: f64 = a
        .iter()
        .map(|ta| b.iter().map(|tb| jaro_winkler(ta, tb)).fold(0.0, f64::max))
        .sum();
    total / a.len() as f64
}

/// Monge-Elkan over whitespace tokens with Jaro-Winkler as the inner
/// measure, averaged over both directions so the result is symmetric.
pub fn monge_elkan(a: &str, b: &str) -> f64 {
    let ta: Vec<Vec<char>> = a.split_whitespace().map(|t| t.chars().collect()).collect();
    let tb: Vec<Vec<char>> = b.split_whitespace().map(|t| t.chars().collect()).collect();
    monge_elkan_tokens(&ta, &tb)
}

pub fn monge_elkan_tokens(a: &[Vec<char>], b: &[Vec<char>]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => 0.5 * (monge_elkan_directed(a, b) + monge_elkan_directed(b, a)),
    }
}

/// Numeric similarity in `[0, 1]`.
pub fn numeric_similarity(x: f64, y: f64, measure: Measure) -> Result<f64> {
    let Measure::Numeric(m) = measure else {
        return Err(Error::WrongMeasureKind(measure.name()));
    };
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(match m {
        NumericMeasure::ExactMatch => f64::from(u8::from(x == y)),
        NumericMeasure::AbsoluteNorm => absolute_norm(x, y),
    })
}

fn absolute_norm(x: f64, y: f64) -> f64 {
    if x == y {
        return 1.0;
    }
    let scale = libm::fabs(x).max(libm::fabs(y));
    (1.0 - libm::fabs(x - y) / scale).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn set(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn sim(a: &str, b: &str, m: StringMeasure) -> f64 {
        string_similarity(a, b, Measure::String(m)).unwrap()
    }

    #[test]
    fn whitespace_tokens() {
        assert_eq!(tokenize("2 Acadaca St", Tokenizer::Whitespace), set(&["2", "Acadaca", "St"]));
        assert_eq!(tokenize("  a\t b  ", Tokenizer::Whitespace), set(&["a", "b"]));
    }

    #[test]
    fn qgram_padding() {
        assert_eq!(tokenize("ab", Tokenizer::Qgram(3)), set(&["##a", "#ab", "ab#", "b##"]));
        assert_eq!(tokenize("a", Tokenizer::Qgram(2)), set(&["#a", "a#"]));
    }

    #[test]
    fn empty_string_has_no_tokens() {
        assert!(tokenize("", Tokenizer::Whitespace).is_empty());
        assert!(tokenize("", Tokenizer::Qgram(3)).is_empty());
    }

    #[test]
    fn qgram_size_is_validated() {
        assert!(Tokenizer::Qgram(1).validate().is_err());
        assert!(Tokenizer::Qgram(2).validate().is_ok());
    }

    #[test]
    fn token_measures() {
        let j = token_similarity(&set(&["a", "b"]), &set(&["b", "c"]), Measure::Token(TokenMeasure::Jaccard)).unwrap();
        assert!((j - 1.0 / 3.0).abs() < 1e-12);
        let x = set(&["p", "q", "r"]);
        assert_eq!(token_similarity(&x, &x, Measure::Token(TokenMeasure::Dice)).unwrap(), 1.0);
        let o = token_similarity(&set(&["a"]), &set(&["a", "b", "c"]), Measure::Token(TokenMeasure::OverlapCoefficient)).unwrap();
        assert_eq!(o, 1.0);
        let c = token_similarity(&set(&["a"]), &set(&["a", "b", "c", "d"]), Measure::Token(TokenMeasure::Cosine)).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
    }

    #[test]
    fn token_empty_cases() {
        for m in TokenMeasure::ALL {
            assert_eq!(token_similarity(&[], &[], Measure::Token(m)).unwrap(), 1.0);
            assert_eq!(token_similarity(&[], &set(&["a"]), Measure::Token(m)).unwrap(), 0.0);
        }
    }

    #[test]
    fn token_measures_ignore_multiplicity() {
        let a = set(&["a", "a", "b"]);
        let b = set(&["b", "c", "c"]);
        for m in TokenMeasure::ALL {
            let multi = token_similarity(&a, &b, Measure::Token(m)).unwrap();
            let dedup = token_similarity(&set(&["a", "b"]), &set(&["b", "c"]), Measure::Token(m)).unwrap();
            assert_eq!(multi, dedup);
        }
    }

    #[test]
    fn wrong_measure_kind_is_rejected() {
        assert!(token_similarity(&[], &[], Measure::String(StringMeasure::Jaro)).is_err());
        assert!(string_similarity("a", "b", Measure::Token(TokenMeasure::Dice)).is_err());
        assert!(numeric_similarity(1.0, 2.0, Measure::String(StringMeasure::Jaro)).is_err());
    }

    #[test]
    fn levenshtein_kitten_sitting() {
        let a: Vec<char> = "kitten".chars().collect();
        let b: Vec<char> = "sitting".chars().collect();
        assert_eq!(levenshtein_distance(&a, &b), 3);
        assert!((sim("kitten", "sitting", StringMeasure::LevenshteinSim) - (1.0 - 3.0 / 7.0)).abs() < 1e-12);
        assert_eq!(sim("", "", StringMeasure::LevenshteinSim), 1.0);
    }

    #[test]
    fn jaro_winkler_martha() {
        assert!((sim("MARTHA", "MARHTA", StringMeasure::Jaro) - 0.944_444_444_444).abs() < 1e-9);
        assert!((sim("MARTHA", "MARHTA", StringMeasure::JaroWinkler) - 0.961_111_111_111).abs() < 1e-9);
        // DIXON/DICKSONX: m=4, t=0, jaro = (4/5 + 4/8 + 1)/3
        assert!((sim("DIXON", "DICKSONX", StringMeasure::Jaro) - 2.3 / 3.0).abs() < 1e-12);
        assert_eq!(sim("abc", "xyz", StringMeasure::Jaro), 0.0);
        assert_eq!(sim("", "a", StringMeasure::JaroWinkler), 0.0);
    }

    #[test]
    fn exact_match() {
        assert_eq!(sim("Sydney", "Sydney", StringMeasure::ExactMatch), 1.0);
        assert_eq!(sim("Sydney", "sydney", StringMeasure::ExactMatch), 0.0);
    }

    #[test]
    fn alignment_scores() {
        // GATTACA vs GCATGCU: the classic example with +1/-1/-1 scores 0.
        assert_eq!(sim("GATTACA", "GCATGCU", StringMeasure::NeedlemanWunsch), 0.0);
        assert_eq!(sim("abc", "abc", StringMeasure::NeedlemanWunsch), 3.0);
        assert_eq!(sim("abc", "", StringMeasure::NeedlemanWunsch), -3.0);
        assert_eq!(sim("xxabcxx", "abc", StringMeasure::SmithWaterman), 3.0);
        assert_eq!(sim("abc", "xyz", StringMeasure::SmithWaterman), 0.0);
        assert_eq!(normalized_alignment(3.0, 3, 3), 1.0);
        assert_eq!(normalized_alignment(0.0, 0, 0), 1.0);
    }

    #[test]
    fn monge_elkan_is_symmetric_mean() {
        let ab = sim("john smith", "smith jon", StringMeasure::MongeElkan);
        let ba = sim("smith jon", "john smith", StringMeasure::MongeElkan);
        assert_eq!(ab, ba);
        assert_eq!(sim("paul", "paul", StringMeasure::MongeElkan), 1.0);
        assert_eq!(sim(" ", "", StringMeasure::MongeElkan), 1.0);
        assert_eq!(sim("a", " ", StringMeasure::MongeElkan), 0.0);
    }

    #[test]
    fn numeric_measures() {
        let an = Measure::Numeric(NumericMeasure::AbsoluteNorm);
        assert_eq!(numeric_similarity(1978.0, 1978.0, an).unwrap(), 1.0);
        assert_eq!(numeric_similarity(0.0, 0.0, an).unwrap(), 1.0);
        assert_eq!(numeric_similarity(10.0, 5.0, an).unwrap(), 0.5);
        assert_eq!(numeric_similarity(-5.0, 5.0, an).unwrap(), 0.0);
        assert_eq!(numeric_similarity(f64::NAN, 1.0, an), Err(Error::NonFinite));
        let em = Measure::Numeric(NumericMeasure::ExactMatch);
        assert_eq!(numeric_similarity(2.0, 2.0, em).unwrap(), 1.0);
        assert_eq!(numeric_similarity(2.0, 3.0, em).unwrap(), 0.0);
    }
}
