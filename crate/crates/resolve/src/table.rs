//! In-memory tables loaded from delimited text.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core::RecordId;
use crate::{Error, Result};

/// Header used for the id column when the input has none.
pub const DEFAULT_ID_COLUMN: &str = "row_id";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataType {
    #[default]
    Text,
    Numeric,
    Boolean,
}

impl DataType {
    /// Canonical text of a cell, or `None` when it does not parse.
    ///
    /// Numbers are rewritten in shortest round-trip form so that `1978`
    /// and `1978.0` encode to the same value. Booleans become `true` or
    /// `false`.
    pub fn normalize(self, raw: &str) -> Option<String> {
        match self {
            DataType::Text => Some(raw.to_string()),
            DataType::Numeric => {
                let v: f64 = raw.trim().parse().ok()?;
                v.is_finite().then(|| format!("{}", v + 0.0))
            }
            DataType::Boolean => match raw.trim().to_ascii_lowercase().as_str() {
                "true" | "t" | "yes" | "y" | "1" => Some("true".into()),
                "false" | "f" | "no" | "n" | "0" => Some("false".into()),
                _ => None,
            },
        }
    }

    /// Numeric view of a normalized cell (`true` is 1, `false` is 0).
    pub fn as_number(self, cell: &str) -> Option<f64> {
        match self {
            DataType::Text => None,
            DataType::Numeric => cell.parse().ok(),
            DataType::Boolean => Some(if cell == "true" { 1.0 } else { 0.0 }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub dtype: DataType,
    pub values: Vec<Option<String>>,
}

impl Column {
    pub fn new(name: impl Into<String>, dtype: DataType, values: Vec<Option<String>>) -> Self {
        Column { name: name.into(), dtype, values }
    }

    /// Text column from string literals; empty strings become nulls.
    pub fn text<S: AsRef<str>>(name: &str, values: &[S]) -> Self {
        let values = values.iter().map(|v| Some(v.as_ref()).filter(|s| !s.is_empty()).map(String::from)).collect();
        Column::new(name, DataType::Text, values)
    }
}

/// Records with a unique id per row and equally long typed columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub id_column: String,
    ids: Vec<RecordId>,
    columns: Vec<Column>,
    positions: HashMap<RecordId, u32>,
}

impl Table {
    pub fn new(name: impl Into<String>, id_column: impl Into<String>, ids: Vec<RecordId>, columns: Vec<Column>) -> Result<Self> {
        let id_column = id_column.into();
        let mut seen = HashSet::new();
        for c in &columns {
            if c.values.len() != ids.len() {
                return Err(Error::Schema(format!(
                    "column {:?} has {} cells for {} records",
                    c.name,
                    c.values.len(),
                    ids.len()
                )));
            }
            if !seen.insert(c.name.as_str()) || c.name == id_column {
                return Err(Error::Schema(format!("duplicate column name {:?}", c.name)));
            }
        }
        if ids.len() > u32::MAX as usize {
            return Err(Error::Schema(format!("{} records exceed the supported maximum", ids.len())));
        }
        let mut positions = HashMap::with_capacity(ids.len());
        for (i, &id) in ids.iter().enumerate() {
            if positions.insert(id, i as u32).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
        Ok(Table { name: name.into(), id_column, ids, columns, positions })
    }

    /// Table with ids `0..n`.
    pub fn with_sequential_ids(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.values.len());
        Table::new(name, DEFAULT_ID_COLUMN, (0..n as RecordId).collect(), columns)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[RecordId] {
        &self.ids
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns.iter().find(|c| c.name == name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c.name == name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn position(&self, id: RecordId) -> Result<usize> {
        self.positions.get(&id).map(|&p| p as usize).ok_or(Error::UnknownId(id))
    }

    /// Same ids, new columns.
    pub fn with_columns(&self, columns: Vec<Column>) -> Result<Self> {
        Table::new(self.name.clone(), self.id_column.clone(), self.ids.clone(), columns)
    }
}

/// How to read a delimited file.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Column holding non-negative integer record ids. Without one, ids are
    /// the zero-based row numbers.
    pub id_column: Option<String>,
    /// Declared types; undeclared columns are text.
    pub types: BTreeMap<String, DataType>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { delimiter: b',', id_column: None, types: BTreeMap::new() }
    }
}

/// A cell that did not parse as its declared type and was loaded as null.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseWarning {
    pub column: String,
    pub row: usize,
    pub value: String,
    pub expected: DataType,
}

#[derive(Clone, Debug)]
pub struct Loaded {
    pub table: Table,
    pub warnings: Vec<ParseWarning>,
}

fn table_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn load_dataset(path: &Path, options: &LoadOptions) -> Result<Loaded> {
    if !path.is_file() {
        return Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file")));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = reader.headers().map_err(|e| Error::csv(path, e))?.iter().map(String::from).collect();
    if header.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::MalformedHeader { path: path.into(), reason: "empty header row".into() });
    }
    if let Some(h) = header.iter().find(|h| h.trim().is_empty()) {
        return Err(Error::MalformedHeader { path: path.into(), reason: format!("blank column name in {h:?}") });
    }
    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateColumn { path: path.into(), column: h.clone() });
        }
    }
    for name in options.types.keys() {
        if !seen.contains(name.as_str()) {
            return Err(Error::UnknownColumn(name.clone()));
        }
    }
    let id_pos = match &options.id_column {
        Some(name) => Some(header.iter().position(|h| h == name).ok_or_else(|| Error::UnknownColumn(name.clone()))?),
        None => None,
    };

    let dtypes: Vec<DataType> = header.iter().map(|h| options.types.get(h).copied().unwrap_or_default()).collect();
    let mut values: Vec<Vec<Option<String>>> = vec![Vec::new(); header.len()];
    let mut ids = Vec::new();
    let mut warnings = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    while reader.read_record(&mut record).map_err(|e| Error::csv(path, e))? {
        for (c, raw) in record.iter().enumerate() {
            if Some(c) == id_pos {
                let id = raw.trim().parse::<RecordId>().map_err(|_| {
                    Error::format(path, format!("row {row}: id {raw:?} is not a non-negative integer"))
                })?;
                ids.push(id);
                continue;
            }
            let cell = if raw.is_empty() {
                None
            } else {
                let v = dtypes[c].normalize(raw);
                if v.is_none() {
                    warnings.push(ParseWarning { column: header[c].clone(), row, value: raw.to_string(), expected: dtypes[c] });
                }
                v
            };
            values[c].push(cell);
        }
        row += 1;
    }
    if row == 0 {
        return Err(Error::EmptyDataset { path: path.into() });
    }
    if id_pos.is_none() {
        ids = (0..row as RecordId).collect();
    }
    let columns = header
        .iter()
        .zip(dtypes)
        .zip(values)
        .enumerate()
        .filter(|(c, _)| Some(*c) != id_pos)
        .map(|(_, ((name, dtype), values))| Column::new(name.clone(), dtype, values))
        .collect();
    let id_column = options.id_column.clone().unwrap_or_else(|| DEFAULT_ID_COLUMN.to_string());
    let table = Table::new(table_name(path), id_column, ids, columns)?;
    Ok(Loaded { table, warnings })
}

/// Writes the table with its id column first; nulls become empty fields.
pub fn write_table(table: &Table, path: &Path, delimiter: u8) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(BufWriter::new(file));
    let header = std::iter::once(table.id_column.as_str()).chain(table.columns.iter().map(|c| c.name.as_str()));
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    let mut row: Vec<String> = Vec::with_capacity(table.columns.len() + 1);
    for (i, id) in table.ids.iter().enumerate() {
        row.clear();
        row.push(id.to_string());
        row.extend(table.columns.iter().map(|c| c.values[i].clone().unwrap_or_default()));
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Buffered file writer with path-aware errors.
pub(crate) struct TextWriter<'a> {
    path: &'a Path,
    inner: BufWriter<File>,
}

impl<'a> TextWriter<'a> {
    pub(crate) fn create(path: &'a Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(TextWriter { path, inner: BufWriter::with_capacity(1 << 20, file) })
    }

    pub(crate) fn line(&mut self, s: &str) -> Result<()> {
        self.inner.write_all(s.as_bytes()).and_then(|_| self.inner.write_all(b"\n")).map_err(|e| Error::io(self.path, e))
    }

    pub(crate) fn raw(&mut self, bytes: &[u8]) -> Result<()> {
        self.inner.write_all(bytes).map_err(|e| Error::io(self.path, e))
    }

    pub(crate) fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::io(self.path, e))
    }
}
