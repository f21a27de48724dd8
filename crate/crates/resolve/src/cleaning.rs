//! Regex cleaning rules and constant-column removal.

use std::collections::BTreeSet;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::table::{Column, Table};
use crate::{Error, Result};

/// Rule as written in the configuration file.
///
/// Exactly one of `column` and `column_pattern` is given. `replacement` is
/// required for `replace` and forbidden for `nullify`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_pattern: Option<String>,
    pub pattern: String,
    pub action: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replacement: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Replace,
    Nullify,
}

#[derive(Clone, Debug)]
pub enum ColumnSelector {
    Exact(String),
    Pattern(Regex),
}

impl ColumnSelector {
    pub fn matches(&self, column: &str) -> bool {
        match self {
            ColumnSelector::Exact(name) => name == column,
            ColumnSelector::Pattern(re) => re.is_match(column),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    /// Substitute every match.
    Replace(String),
    /// Null the cell when the pattern matches all of it.
    Nullify,
}

#[derive(Clone, Debug)]
pub struct CleaningRule {
    pub selector: ColumnSelector,
    pub action: Action,
    pattern: Regex,
    full: Regex,
}

fn compile(pattern: &str) -> Result<Regex> {
    Regex::new(pattern).map_err(|source| Error::Regex { pattern: pattern.to_string(), source })
}

impl CleaningRule {
    pub fn new(selector: ColumnSelector, pattern: &str, action: Action) -> Result<Self> {
        Ok(CleaningRule { selector, action, pattern: compile(pattern)?, full: compile(&format!("^(?:{pattern})$"))? })
    }

    pub fn compile(spec: &RuleSpec) -> Result<Self> {
        let selector = match (&spec.column, &spec.column_pattern) {
            (Some(c), None) => ColumnSelector::Exact(c.clone()),
            (None, Some(p)) => ColumnSelector::Pattern(compile(p)?),
            _ => return Err(Error::Config("a cleaning rule needs exactly one of `column` and `column_pattern`".into())),
        };
        let action = match (spec.action, &spec.replacement) {
            (ActionKind::Replace, Some(r)) => Action::Replace(r.clone()),
            (ActionKind::Nullify, None) => Action::Nullify,
            (ActionKind::Replace, None) => return Err(Error::Config("`replace` rule without `replacement`".into())),
            (ActionKind::Nullify, Some(_)) => return Err(Error::Config("`nullify` rule takes no `replacement`".into())),
        };
        CleaningRule::new(selector, &spec.pattern, action)
    }

    pub fn pattern(&self) -> &str {
        self.pattern.as_str()
    }

    /// New cell value, or `None` when the rule does not touch the cell.
    fn apply(&self, cell: &str) -> Option<Option<String>> {
        match &self.action {
            Action::Nullify => self.full.is_match(cell).then_some(None),
            Action::Replace(r) => match self.pattern.replace_all(cell, r.as_str()) {
                std::borrow::Cow::Borrowed(_) => None,
                std::borrow::Cow::Owned(s) if s == cell => None,
                std::borrow::Cow::Owned(s) => Some(Some(s)),
            },
        }
    }
}

pub fn compile_rules(specs: &[RuleSpec]) -> Result<Vec<CleaningRule>> {
    specs.iter().map(CleaningRule::compile).collect()
}

/// Cleaned table plus the number of cells each rule changed.
#[derive(Clone, Debug)]
pub struct Cleaned {
    pub table: Table,
    pub applied: Vec<usize>,
}

/// Applies the rules in order to every selected cell. Cells left empty
/// become null, as do cells of typed columns that no longer parse.
pub fn apply_cleaning_rules(table: &Table, rules: &[CleaningRule]) -> Result<Cleaned> {
    for r in rules {
        if let ColumnSelector::Exact(name) = &r.selector {
            table.column(name)?;
        }
    }
    let per_column: Vec<(Column, Vec<usize>)> = table
        .columns()
        .par_iter()
        .map(|col| {
            let mut counts = vec![0usize; rules.len()];
            let selected: Vec<usize> = (0..rules.len()).filter(|&i| rules[i].selector.matches(&col.name)).collect();
            if selected.is_empty() {
                return (col.clone(), counts);
            }
            let values = col
                .values
                .iter()
                .map(|cell| {
                    let mut cell = cell.clone();
                    for &i in &selected {
                        let Some(current) = cell.as_deref() else { break };
                        if let Some(next) = rules[i].apply(current) {
                            counts[i] += 1;
                            cell = next.filter(|s| !s.is_empty()).and_then(|s| col.dtype.normalize(&s));
                        }
                    }
                    cell
                })
                .collect();
            (Column::new(col.name.clone(), col.dtype, values), counts)
        })
        .collect();
    let mut applied = vec![0usize; rules.len()];
    let mut columns = Vec::with_capacity(per_column.len());
    for (col, counts) in per_column {
        for (a, c) in applied.iter_mut().zip(counts) {
            *a += c;
        }
        columns.push(col);
    }
    Ok(Cleaned { table: table.with_columns(columns)?, applied })
}

/// Outcome of constant-column removal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantColumns {
    pub removed: Vec<String>,
    /// Constant columns kept because they were listed as protected.
    pub retained: Vec<String>,
}

pub fn is_constant(column: &Column) -> bool {
    let mut first: Option<&str> = None;
    for v in column.values.iter().flatten() {
        match first {
            None => first = Some(v),
            Some(f) if f != v => return false,
            _ => {}
        }
    }
    true
}

/// Removes columns with at most one distinct non-null value.
pub fn drop_constant_columns(table: &Table) -> Result<(Table, ConstantColumns)> {
    drop_constant_columns_except(table, &BTreeSet::new())
}

/// Like [`drop_constant_columns`], but keeps the `protected` columns.
pub fn drop_constant_columns_except(table: &Table, protected: &BTreeSet<String>) -> Result<(Table, ConstantColumns)> {
    let flags: Vec<bool> = table.columns().par_iter().map(is_constant).collect();
    let mut report = ConstantColumns::default();
    let mut columns = Vec::new();
    for (col, constant) in table.columns().iter().zip(flags) {
        if !constant {
            columns.push(col.clone());
        } else if protected.contains(&col.name) {
            report.retained.push(col.name.clone());
            columns.push(col.clone());
        } else {
            report.removed.push(col.name.clone());
        }
    }
    Ok((table.with_columns(columns)?, report))
}
