//! Similarity feature vectors for candidate pairs.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::forest::MISSING;
use crate::core::similarity::{
    jaro, jaro_winkler, levenshtein_similarity, monge_elkan_tokens, needleman_wunsch, normalized_alignment,
    numeric_similarity, smith_waterman, token_set_similarity, Measure, NumericMeasure, StringMeasure, TokenMeasure,
    TokenSet, Tokenizer,
};
use crate::core::RecordId;
use crate::schema::{AttributeSchema, BoundAttribute};
use crate::table::{DataType, Table, TextWriter};
use crate::{Error, Result};

/// Pairs featurized per parallel batch when streaming to a file.
pub const STREAM_CHUNK: usize = 1 << 15;

fn default_tokenizers() -> Vec<Tokenizer> {
    vec![Tokenizer::Whitespace, Tokenizer::Qgram(3)]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureOptions {
    /// Tokenizers applied to every text attribute for the token measures.
    #[serde(default = "default_tokenizers")]
    pub tokenizers: Vec<Tokenizer>,
    /// Feature names to leave out.
    #[serde(default)]
    pub exclude: Vec<String>,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions { tokenizers: default_tokenizers(), exclude: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub attribute: String,
    pub measure: Measure,
    pub tokenizer: Option<Tokenizer>,
}

impl FeatureDef {
    /// `attr__measure`, with the tokenizer tag appended for token measures.
    pub fn name(&self) -> String {
        match self.tokenizer {
            Some(t) => format!("{}__{}_{}", self.attribute, self.measure.name(), t.tag()),
            None => format!("{}__{}", self.attribute, self.measure.name()),
        }
    }
}

/// Fixed feature order shared by training and scoring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub features: Vec<FeatureDef>,
}

impl FeatureSpec {
    /// Text attributes get every string measure and every token measure per
    /// tokenizer; numeric and boolean attributes get exact match and
    /// absolute norm.
    pub fn from_schema(schema: &AttributeSchema, table: &Table, options: &FeatureOptions) -> Result<Self> {
        let mut tokenizers = Vec::new();
        for t in &options.tokenizers {
            let t = t.validate()?;
            if tokenizers.contains(&t) {
                return Err(Error::Config(format!("tokenizer {} listed twice", t.tag())));
            }
            tokenizers.push(t);
        }
        let mut features = Vec::new();
        for a in schema.bind(table)? {
            match a.dtype {
                DataType::Text => {
                    for m in StringMeasure::ALL {
                        features.push(FeatureDef { attribute: a.name.clone(), measure: Measure::String(m), tokenizer: None });
                    }
                    for &t in &tokenizers {
                        for m in TokenMeasure::ALL {
                            features.push(FeatureDef { attribute: a.name.clone(), measure: Measure::Token(m), tokenizer: Some(t) });
                        }
                    }
                }
                DataType::Numeric | DataType::Boolean => {
                    for m in NumericMeasure::ALL {
                        features.push(FeatureDef { attribute: a.name.clone(), measure: Measure::Numeric(m), tokenizer: None });
                    }
                }
            }
        }
        for name in &options.exclude {
            let before = features.len();
            features.retain(|f| &f.name() != name);
            if features.len() == before {
                return Err(Error::Config(format!("excluded feature {name:?} does not exist")));
            }
        }
        if features.is_empty() {
            return Err(Error::Config("the feature spec is empty".into()));
        }
        Ok(FeatureSpec { features })
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(FeatureDef::name).collect()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Features of one attribute, computed together.
struct AttributePlan {
    left: BoundAttribute,
    right: BoundAttribute,
    dtype: DataType,
    /// `(output slot, measure, index into tokenizers)`.
    slots: Vec<(usize, Measure, Option<usize>)>,
    tokenizers: Vec<Tokenizer>,
    needs_words: bool,
}

/// A text value prepared once for all measures.
struct Prepared<'s> {
    text: &'s str,
    chars: Vec<char>,
    words: Vec<Vec<char>>,
    sets: Vec<TokenSet>,
}

impl AttributePlan {
    fn prepare<'s>(&self, text: &'s str) -> Prepared<'s> {
        Prepared {
            text,
            chars: text.chars().collect(),
            words: if self.needs_words { text.split_whitespace().map(|w| w.chars().collect()).collect() } else { Vec::new() },
            sets: self.tokenizers.iter().map(|&t| TokenSet::from_text(text, t)).collect(),
        }
    }

    fn text_measure(&self, a: &Prepared, b: &Prepared, measure: Measure, tok: Option<usize>) -> f64 {
        match measure {
            Measure::String(m) => match m {
                StringMeasure::LevenshteinSim => levenshtein_similarity(&a.chars, &b.chars),
                StringMeasure::Jaro => jaro(&a.chars, &b.chars),
                StringMeasure::JaroWinkler => jaro_winkler(&a.chars, &b.chars),
                StringMeasure::ExactMatch => f64::from(u8::from(a.text == b.text)),
                StringMeasure::NeedlemanWunsch => {
                    normalized_alignment(needleman_wunsch(&a.chars, &b.chars) as f64, a.chars.len(), b.chars.len())
                }
                StringMeasure::SmithWaterman => {
                    normalized_alignment(smith_waterman(&a.chars, &b.chars) as f64, a.chars.len(), b.chars.len())
                }
                StringMeasure::MongeElkan => monge_elkan_tokens(&a.words, &b.words),
            },
            Measure::Token(m) => {
                let t = tok.expect("token feature without tokenizer");
                token_set_similarity(&a.sets[t], &b.sets[t], m)
            }
            Measure::Numeric(_) => unreachable!("numeric measure on a text attribute"),
        }
    }

    /// `cache` holds the prepared left values of the previous call, reused
    /// while consecutive pairs share a left record.
    fn fill<'t>(
        &self,
        left: &'t Table,
        lrow: usize,
        right: &'t Table,
        rrow: usize,
        cache: &mut Option<(usize, Vec<Prepared<'t>>)>,
        out: &mut [f64],
    ) -> Result<()> {
        let va = self.left.values(left, lrow);
        let vb = self.right.values(right, rrow);
        if va.is_empty() || vb.is_empty() {
            for &(slot, _, _) in &self.slots {
                out[slot] = MISSING;
            }
            return Ok(());
        }
        for &(slot, _, _) in &self.slots {
            out[slot] = f64::NEG_INFINITY;
        }
        match self.dtype {
            DataType::Text => {
                if cache.as_ref().is_none_or(|(row, _)| *row != lrow) {
                    *cache = Some((lrow, va.iter().map(|v| self.prepare(v)).collect()));
                }
                let pa = &cache.as_ref().expect("just filled").1;
                let pb: Vec<Prepared> = vb.iter().map(|v| self.prepare(v)).collect();
                for a in pa {
                    for b in &pb {
                        for &(slot, m, tok) in &self.slots {
                            out[slot] = out[slot].max(self.text_measure(a, b, m, tok));
                        }
                    }
                }
            }
            DataType::Numeric | DataType::Boolean => {
                let num = |v: &&str| {
                    self.dtype
                        .as_number(v)
                        .ok_or_else(|| Error::Schema(format!("attribute {:?}: {v:?} is not a number", self.left.name)))
                };
                let xa = va.iter().map(num).collect::<Result<Vec<f64>>>()?;
                let xb = vb.iter().map(num).collect::<Result<Vec<f64>>>()?;
                for &x in &xa {
                    for &y in &xb {
                        for &(slot, m, _) in &self.slots {
                            out[slot] = out[slot].max(numeric_similarity(x, y, m)?);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Computes feature vectors for pairs drawn from `left` and `right` (the
/// same table in dedup mode).
pub struct Featurizer<'t> {
    left: &'t Table,
    right: &'t Table,
    width: usize,
    plans: Vec<AttributePlan>,
}

impl<'t> Featurizer<'t> {
    pub fn new(spec: &FeatureSpec, schema: &AttributeSchema, left: &'t Table, right: &'t Table) -> Result<Self> {
        let lb = schema.bind(left)?;
        let rb = schema.bind(right)?;
        let mut plans: Vec<AttributePlan> = Vec::new();
        for (slot, f) in spec.features.iter().enumerate() {
            let pos = lb.iter().position(|a| a.name == f.attribute).ok_or_else(|| Error::UnknownAttribute(f.attribute.clone()))?;
            if lb[pos].dtype != rb[pos].dtype {
                return Err(Error::Schema(format!("attribute {:?} has different datatypes in the two inputs", f.attribute)));
            }
            let plan = match plans.iter_mut().find(|p| p.left.name == f.attribute) {
                Some(p) => p,
                None => {
                    plans.push(AttributePlan {
                        left: lb[pos].clone(),
                        right: rb[pos].clone(),
                        dtype: lb[pos].dtype,
                        slots: Vec::new(),
                        tokenizers: Vec::new(),
                        needs_words: false,
                    });
                    plans.last_mut().expect("just pushed")
                }
            };
            let kind_ok = matches!(
                (plan.dtype, f.measure),
                (DataType::Text, Measure::String(_) | Measure::Token(_)) | (DataType::Numeric | DataType::Boolean, Measure::Numeric(_))
            );
            if !kind_ok || matches!(f.measure, Measure::Token(_)) != f.tokenizer.is_some() {
                return Err(Error::Layout(format!("feature {} does not fit attribute type {:?}", f.name(), plan.dtype)));
            }
            let tok = f.tokenizer.map(|t| match plan.tokenizers.iter().position(|&x| x == t) {
                Some(i) => i,
                None => {
                    plan.tokenizers.push(t);
                    plan.tokenizers.len() - 1
                }
            });
            plan.needs_words |= f.measure == Measure::String(StringMeasure::MongeElkan);
            plan.slots.push((slot, f.measure, tok));
        }
        Ok(Featurizer { left, right, width: spec.len(), plans })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Fills `out` (of length [`Self::width`]) for one pair.
    pub fn vector_into(&self, id_a: RecordId, id_b: RecordId, out: &mut [f64]) -> Result<()> {
        self.vector_cached(id_a, id_b, &mut self.empty_cache(), out)
    }

    fn empty_cache(&self) -> Vec<Option<(usize, Vec<Prepared<'t>>)>> {
        self.plans.iter().map(|_| None).collect()
    }

    fn vector_cached(
        &self,
        id_a: RecordId,
        id_b: RecordId,
        cache: &mut [Option<(usize, Vec<Prepared<'t>>)>],
        out: &mut [f64],
    ) -> Result<()> {
        let (la, rb) = (self.left.position(id_a)?, self.right.position(id_b)?);
        for (p, c) in self.plans.iter().zip(cache) {
            p.fill(self.left, la, self.right, rb, c, out)?;
        }
        Ok(())
    }

    pub fn vector(&self, id_a: RecordId, id_b: RecordId) -> Result<Vec<f64>> {
        let mut out = vec![MISSING; self.width];
        self.vector_into(id_a, id_b, &mut out)?;
        Ok(out)
    }

    /// Row-major features for `pairs`, computed in parallel.
    pub fn matrix(&self, pairs: &[(RecordId, RecordId)]) -> Result<Vec<f64>> {
        let mut values = vec![MISSING; pairs.len() * self.width];
        if self.width == 0 {
            return Ok(values);
        }
        values
            .par_chunks_mut(self.width * 256)
            .zip(pairs.par_chunks(256))
            .try_for_each(|(rows, chunk)| {
                let mut cache = self.empty_cache();
                for (row, &(a, b)) in rows.chunks_mut(self.width).zip(chunk) {
                    self.vector_cached(a, b, &mut cache, row)?;
                }
                Ok::<(), Error>(())
            })?;
        Ok(values)
    }
}

/// Feature vectors with their pair ids.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub pairs: Vec<(RecordId, RecordId)>,
    /// Row-major, `pairs.len() * names.len()` values; missing is NaN.
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width()..(i + 1) * self.width()]
    }

    pub fn header(&self) -> String {
        header(&self.names)
    }
}

pub fn featurize(featurizer: &Featurizer, spec: &FeatureSpec, pairs: &[(RecordId, RecordId)]) -> Result<FeatureMatrix> {
    Ok(FeatureMatrix { names: spec.names(), pairs: pairs.to_vec(), values: featurizer.matrix(pairs)? })
}

pub fn header(names: &[String]) -> String {
    let mut h = String::from("id_a,id_b");
    for n in names {
        h.push(',');
        h.push_str(n);
    }
    h
}

fn format_row(buf: &mut String, (a, b): (RecordId, RecordId), row: &[f64]) {
    buf.clear();
    let _ = write!(buf, "{a},{b}");
    for v in row {
        buf.push(',');
        if !v.is_nan() {
            let _ = write!(buf, "{v}");
        }
    }
}

pub fn write_features(path: &Path, m: &FeatureMatrix) -> Result<()> {
    let mut w = TextWriter::create(path)?;
    w.line(&m.header())?;
    let mut buf = String::new();
    for (i, &p) in m.pairs.iter().enumerate() {
        format_row(&mut buf, p, m.row(i));
        w.line(&buf)?;
    }
    w.finish()
}

/// Featurizes `pairs` batch by batch straight to `path`, keeping memory flat.
pub fn featurize_to_file(featurizer: &Featurizer, spec: &FeatureSpec, pairs: &[(RecordId, RecordId)], path: &Path) -> Result<()> {
    let mut w = TextWriter::create(path)?;
    w.line(&header(&spec.names()))?;
    let width = featurizer.width();
    for chunk in pairs.chunks(STREAM_CHUNK) {
        let values = featurizer.matrix(chunk)?;
        let text: Vec<String> = chunk
            .par_iter()
            .zip(values.par_chunks(width.max(1)))
            .map(|(&p, row)| {
                let mut buf = String::new();
                format_row(&mut buf, p, row);
                buf.push('\n');
                buf
            })
            .collect();
        for line in text {
            w.raw(line.as_bytes())?;
        }
    }
    w.finish()
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| Error::format(path, "empty feature file"))?;
    let names: Vec<String> = match head.strip_prefix("id_a,id_b") {
        Some("") => Vec::new(),
        Some(rest) if rest.starts_with(',') => rest[1..].split(',').map(String::from).collect(),
        _ => return Err(Error::format(path, "feature header must start with `id_a,id_b`")),
    };
    let width = names.len();
    let mut pairs = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = || Error::format(path, format!("line {}: malformed feature row", i + 2));
        let mut fields = line.split(',');
        let a = fields.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let b = fields.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let before = values.len();
        for f in fields {
            values.push(if f.is_empty() { MISSING } else { f.parse::<f64>().map_err(|_| bad())? });
        }
        if values.len() - before != width {
            return Err(bad());
        }
        pairs.push((a, b));
    }
    Ok(FeatureMatrix { names, pairs, values })
}
