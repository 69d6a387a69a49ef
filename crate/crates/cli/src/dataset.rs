//! CSV ingestion into typed columns.

use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    /// Values plus the sorted level set; the first level is the reference.
    Categorical { values: Vec<String>, levels: Vec<String> },
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Complete rows of the columns a model refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetTable {
    pub names: Vec<String>,
    pub columns: Vec<Column>,
    /// 1-based data line of each kept row, header excluded.
    pub rows: Vec<usize>,
    /// Rows removed for empty or unparseable cells.
    pub dropped_rows: usize,
}

impl DatasetTable {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Column::len)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| CliError::usage(format!("column '{name}' is not in the dataset")))
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads `columns` from a headed, comma-delimited CSV file.
///
/// A column is numeric when most of its non-empty cells parse as finite
/// numbers, unless it is listed in `factors`. Rows with an empty cell, or a
/// non-numeric cell in a numeric column, are dropped.
pub fn ingest_csv(path: &Path, columns: &[String], factors: &[String]) -> Result<DatasetTable> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers()?.clone();

    let mut wanted: Vec<String> = Vec::new();
    for c in columns {
        if !wanted.contains(c) {
            wanted.push(c.clone());
        }
    }
    let mut positions = Vec::with_capacity(wanted.len());
    for name in &wanted {
        let pos = header.iter().position(|h| h == name).ok_or_else(|| {
            CliError::usage(format!(
                "column '{name}' not found in {} (available: {})",
                path.display(),
                header.iter().collect::<Vec<_>>().join(", ")
            ))
        })?;
        positions.push(pos);
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); wanted.len()];
    for record in reader.records() {
        let record = record?;
        for (k, &pos) in positions.iter().enumerate() {
            raw[k].push(record.get(pos).unwrap_or("").to_string());
        }
    }
    let total = raw.first().map_or(0, Vec::len);

    let numeric: Vec<bool> = wanted
        .iter()
        .zip(&raw)
        .map(|(name, cells)| {
            if factors.contains(name) {
                return false;
            }
            let filled: Vec<&String> = cells.iter().filter(|c| !c.is_empty()).collect();
            let parsed = filled.iter().filter(|c| parse_number(c).is_some()).count();
            !filled.is_empty() && 2 * parsed > filled.len()
        })
        .collect();

    let keep: Vec<bool> = (0..total)
        .map(|i| {
            raw.iter().zip(&numeric).all(|(cells, &is_num)| {
                let c = &cells[i];
                !c.is_empty() && (!is_num || parse_number(c).is_some())
            })
        })
        .collect();
    let kept = keep.iter().filter(|&&k| k).count();
    if kept == 0 {
        return Err(CliError::usage(format!(
            "no complete rows left in {} after filtering",
            path.display()
        )));
    }

    let columns = raw
        .into_iter()
        .zip(&numeric)
        .map(|(cells, &is_num)| {
            let rows = cells.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(c, _)| c);
            if is_num {
                Column::Numeric(rows.map(|c| parse_number(&c).unwrap_or(f64::NAN)).collect())
            } else {
                let values: Vec<String> = rows.collect();
                let levels = values.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
                Column::Categorical { values, levels }
            }
        })
        .collect();

    Ok(DatasetTable {
        names: wanted,
        columns,
        rows: (1..=total).filter(|i| keep[i - 1]).collect(),
        dropped_rows: total - kept,
    })
}
