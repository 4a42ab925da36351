use std::path::Path;

use super::FuncError;
use crate::builder::{Arg, PairFunction};
use crate::exactnum::Rational;

/// Pair function backed by an explicit rational table, indexed by position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFunction {
    descriptor: String,
    rows: Vec<Vec<Rational>>,
}

impl TableFunction {
    /// Rejects ragged tables.
    pub fn new(descriptor: impl Into<String>, rows: Vec<Vec<Rational>>) -> Result<Self, FuncError> {
        if let Some(first) = rows.first() {
            if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != first.len()) {
                return Err(FuncError::DimensionMismatch(format!(
                    "row {r} has {} entries, row 0 has {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        Ok(TableFunction {
            descriptor: descriptor.into(),
            rows,
        })
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.rows.first().map_or(0, Vec::len))
    }

    /// Fails unless every position below `points` has a row and a column.
    pub fn check_covers(&self, points: usize) -> Result<(), FuncError> {
        let (r, c) = self.shape();
        if points > 0 && (r < points || c < points) {
            return Err(FuncError::DimensionMismatch(format!(
                "table is {r}x{c} but there are {points} points"
            )));
        }
        Ok(())
    }
}

impl PairFunction for TableFunction {
    fn descriptor(&self) -> String {
        self.descriptor.clone()
    }

    fn eval(&self, x: Arg<'_>, y: Arg<'_>) -> Result<Rational, FuncError> {
        self.rows
            .get(x.position)
            .and_then(|row| row.get(y.position))
            .cloned()
            .ok_or_else(|| FuncError::DimensionMismatch(format!(
                "no entry ({}, {}) in a {:?} table",
                x.position,
                y.position,
                self.shape()
            )))
    }
}

pub fn parse_table(descriptor: impl Into<String>, text: &str) -> Result<TableFunction, FuncError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FuncError::Format(format!("table row {r}: {e}")))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<Rational>()
                    .map_err(|e| FuncError::Format(format!("table entry ({r}, {c}): {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    TableFunction::new(descriptor, rows)
}

/// Reads a CSV of `p/q` entries.
pub fn load_table(path: impl AsRef<Path>) -> Result<TableFunction, FuncError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| FuncError::Io(format!("{}: {e}", path.display())))?;
    parse_table(format!("table:{}", path.display()), &text)
}

/// CSV text that [`parse_table`] reads back to the same table.
pub fn dump_table(table: &TableFunction) -> String {
    let mut out = String::new();
    for row in table.rows() {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
