//! Dictionary encoding of cell values to dense integer codes.

use std::collections::HashMap;
use std::path::Path;

use crate::schema::Attribute;
use crate::table::Table;
use crate::{Error, Result};

/// Bijection between values and codes `0..len`, assigned in order of first
/// occurrence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dictionary {
    pub name: String,
    values: Vec<String>,
    codes: HashMap<String, u32>,
}

impl Dictionary {
    pub fn new(name: impl Into<String>) -> Self {
        Dictionary { name: name.into(), ..Default::default() }
    }

    /// Code of `value`, assigning the next one if unseen.
    pub fn encode(&mut self, value: &str) -> u32 {
        if let Some(&c) = self.codes.get(value) {
            return c;
        }
        let c = u32::try_from(self.values.len()).expect("more than u32::MAX distinct values");
        self.values.push(value.to_string());
        self.codes.insert(value.to_string(), c);
        c
    }

    pub fn code(&self, value: &str) -> Option<u32> {
        self.codes.get(value).copied()
    }

    pub fn decode(&self, code: u32) -> Option<&str> {
        self.values.get(code as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    /// Writes `code,value` lines under a header.
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        w.write_record(["code", "value"]).map_err(|e| Error::csv(path, e))?;
        for (c, v) in self.values.iter().enumerate() {
            w.write_record([c.to_string().as_str(), v.as_str()]).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, name: impl Into<String>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut dict = Dictionary::new(name);
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let code: usize = rec
                .get(0)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| Error::format(path, format!("line {}: bad code", i + 2)))?;
            let value = rec.get(1).ok_or_else(|| Error::format(path, format!("line {}: missing value", i + 2)))?;
            if code != i || dict.code(value).is_some() {
                return Err(Error::format(path, format!("line {}: codes must be dense and values unique", i + 2)));
            }
            dict.encode(value);
        }
        Ok(dict)
    }
}

/// Encodes one column; nulls stay null.
pub fn encode_dictionary(table: &Table, column: &str) -> Result<(Vec<Option<u32>>, Dictionary)> {
    let col = table.column(column)?;
    let mut dict = Dictionary::new(column);
    let codes = col.values.iter().map(|v| v.as_deref().map(|v| dict.encode(v))).collect();
    Ok((codes, dict))
}

/// Codes of one attribute, `codes[table][row]` holding one entry per bound
/// column.
pub type AttributeCodes = Vec<Vec<Vec<Option<u32>>>>;

/// Encodes every column of `attribute` across `tables` with one shared
/// dictionary, so equal values compare equal across columns and tables.
/// Codes follow first occurrence over tables, then rows, then columns.
pub fn encode_attribute(tables: &[&Table], attribute: &Attribute) -> Result<(AttributeCodes, Dictionary)> {
    let mut dict = Dictionary::new(attribute.name.clone());
    let mut out = Vec::with_capacity(tables.len());
    for t in tables {
        let cols = attribute.columns.iter().map(|c| t.column(c)).collect::<Result<Vec<_>>>()?;
        let rows = (0..t.len())
            .map(|r| cols.iter().map(|c| c.values[r].as_deref().map(|v| dict.encode(v))).collect())
            .collect();
        out.push(rows);
    }
    Ok((out, dict))
}
