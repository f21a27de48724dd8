//! Entity attributes and their column bindings.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::table::{DataType, Table};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    #[default]
    Scalar,
    /// Several columns holding interchangeable values, such as phones.
    List,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Attribute {
    pub name: String,
    #[serde(default)]
    pub kind: AttributeKind,
    pub columns: Vec<String>,
}

impl Attribute {
    pub fn scalar(name: &str, column: &str) -> Self {
        Attribute { name: name.into(), kind: AttributeKind::Scalar, columns: vec![column.into()] }
    }

    pub fn list(name: &str, columns: &[&str]) -> Self {
        Attribute { name: name.into(), kind: AttributeKind::List, columns: columns.iter().map(|c| c.to_string()).collect() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
}

/// An attribute resolved against one table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundAttribute {
    pub name: String,
    pub kind: AttributeKind,
    /// Column positions in the table.
    pub columns: Vec<usize>,
    pub dtype: DataType,
}

impl AttributeSchema {
    /// Checks arities and that no name or column is used twice.
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        let mut names = HashSet::new();
        let mut columns = HashSet::new();
        for a in &attributes {
            if !names.insert(a.name.as_str()) {
                return Err(Error::Schema(format!("attribute {:?} declared twice", a.name)));
            }
            match a.kind {
                AttributeKind::Scalar if a.columns.len() != 1 => {
                    return Err(Error::Schema(format!("scalar attribute {:?} must bind exactly one column", a.name)));
                }
                AttributeKind::List if a.columns.len() < 2 => {
                    return Err(Error::Schema(format!("list attribute {:?} must bind at least two columns", a.name)));
                }
                _ => {}
            }
            for c in &a.columns {
                if !columns.insert(c.as_str()) {
                    return Err(Error::Schema(format!("column {c:?} bound to more than one attribute")));
                }
            }
        }
        Ok(AttributeSchema { attributes })
    }

    /// One scalar attribute per column of `table`.
    pub fn from_columns(table: &Table) -> Self {
        AttributeSchema { attributes: table.columns().iter().map(|c| Attribute::scalar(&c.name, &c.name)).collect() }
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, name: &str) -> Result<&Attribute> {
        self.attributes.iter().find(|a| a.name == name).ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn bound_columns(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().flat_map(|a| a.columns.iter().map(String::as_str))
    }

    /// Resolves every attribute against `table`; all columns of one
    /// attribute must share a datatype.
    pub fn bind(&self, table: &Table) -> Result<Vec<BoundAttribute>> {
        self.attributes
            .iter()
            .map(|a| {
                let columns = a.columns.iter().map(|c| table.column_index(c)).collect::<Result<Vec<_>>>()?;
                let dtype = table.columns()[columns[0]].dtype;
                if let Some(&other) = columns.iter().find(|&&c| table.columns()[c].dtype != dtype) {
                    return Err(Error::Schema(format!(
                        "attribute {:?} mixes column types ({:?} and {:?})",
                        a.name,
                        dtype,
                        table.columns()[other].dtype
                    )));
                }
                Ok(BoundAttribute { name: a.name.clone(), kind: a.kind, columns, dtype })
            })
            .collect()
    }
}

impl BoundAttribute {
    /// Distinct non-null values of this attribute for one record, in column
    /// order.
    pub fn values<'t>(&self, table: &'t Table, row: usize) -> Vec<&'t str> {
        let mut out: Vec<&str> = Vec::with_capacity(self.columns.len());
        for &c in &self.columns {
            if let Some(v) = table.columns()[c].values[row].as_deref() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }
}
