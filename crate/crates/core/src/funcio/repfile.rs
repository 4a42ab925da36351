//! JSON representation files.
//!
//! A file stores the function (descriptor plus its full grid on the points),
//! the points, and every row as an explicit prefix of `horizon + 1` values
//! with the milestones inside it. Loading rebuilds frozen rows and re-checks
//! everything that can be checked on the stored prefix.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FunctionSpec, Point, TableFunction};
use crate::builder::{Arg, BuilderError, PointOrder, Representation, RowKind};
use crate::exactnum::Rational;
use crate::theta::Row;

pub const FORMAT: &str = "davies-representation/1";

#[derive(Debug, Error)]
pub enum RepFileError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed representation file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("representation rejected, {invariant} does not hold: {detail}")]
    Invariant { invariant: &'static str, detail: String },
    #[error(transparent)]
    Builder(#[from] BuilderError),
}

fn invariant(invariant: &'static str, detail: impl Into<String>) -> RepFileError {
    RepFileError::Invariant {
        invariant,
        detail: detail.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub descriptor: String,
    pub grid: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRecord {
    pub provenance: String,
    pub values: Vec<Rational>,
    pub milestones: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepFile {
    pub format: String,
    pub function: FunctionRecord,
    pub points: Vec<Point>,
    pub horizon: usize,
    /// `g[0], h[0], g[1], h[1], …`
    pub rows: Vec<RowRecord>,
    pub cutoffs: Vec<Vec<usize>>,
}

impl RepFile {
    pub fn from_representation(rep: &Representation) -> Result<Self, BuilderError> {
        let n = rep.len();
        let horizon = rep.default_horizon()?;
        let grid = (0..n)
            .map(|i| (0..n).map(|j| rep.f(i, j)).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let rows = rep
            .rows()
            .map(|(_, _, row)| {
                let frozen = row.freeze(horizon + 1)?;
                Ok(RowRecord {
                    provenance: frozen.provenance(),
                    values: frozen.prefix(horizon + 1)?,
                    milestones: frozen.milestones(),
                })
            })
            .collect::<Result<Vec<_>, BuilderError>>()?;
        Ok(RepFile {
            format: FORMAT.to_string(),
            function: FunctionRecord {
                descriptor: rep.function().descriptor(),
                grid,
            },
            points: rep.order().points().to_vec(),
            horizon,
            rows,
            cutoffs: rep.cutoff_table()?,
        })
    }

    /// Rebuilds the representation and re-validates it.
    pub fn into_representation(self) -> Result<Representation, RepFileError> {
        if self.format != FORMAT {
            return Err(invariant("format tag", format!("expected {FORMAT:?}, found {:?}", self.format)));
        }
        let n = self.points.len();
        let mut order = PointOrder::new();
        for p in self.points {
            order.insert(p).map_err(|e| invariant("distinct labels", e.to_string()))?;
        }
        if self.rows.len() != 2 * n {
            return Err(invariant("row count", format!("{n} points need {} rows, found {}", 2 * n, self.rows.len())));
        }
        if self.function.grid.len() != n || self.function.grid.iter().any(|r| r.len() != n) {
            return Err(invariant("function grid shape", format!("grid must be {n}x{n}")));
        }

        let mut g_rows = Vec::with_capacity(n);
        let mut h_rows = Vec::with_capacity(n);
        for (idx, record) in self.rows.into_iter().enumerate() {
            let (kind, pos) = (if idx % 2 == 0 { RowKind::G } else { RowKind::H }, idx / 2);
            let expected = format!("{kind}[{pos}]");
            if record.provenance != expected {
                return Err(invariant("row order", format!("row {idx} is {:?}, expected {expected:?}", record.provenance)));
            }
            if record.values.len() != self.horizon + 1 {
                return Err(invariant(
                    "prefix length",
                    format!("{expected} stores {} values, horizon {} needs {}", record.values.len(), self.horizon, self.horizon + 1),
                ));
            }
            let row = Row::frozen(record.provenance, record.values, record.milestones)
                .map_err(|e| invariant("milestone marks", e.to_string()))?;
            match kind {
                RowKind::G => g_rows.push(row),
                RowKind::H => h_rows.push(row),
            }
        }

        check_builtin_grid(&self.function, order.points())?;
        let table = TableFunction::new(self.function.descriptor, self.function.grid)
            .map_err(|e| invariant("function grid shape", e.to_string()))?;
        let rep = Representation::from_parts(order, g_rows, h_rows, Arc::new(table))?;

        let horizon = rep
            .default_horizon()
            .map_err(|e| invariant("milestone coverage", e.to_string()))?;
        if horizon != self.horizon {
            return Err(invariant("horizon", format!("stored {}, milestones give {horizon}", self.horizon)));
        }
        let cutoffs = rep.cutoff_table().map_err(|e| invariant("milestone coverage", e.to_string()))?;
        if cutoffs != self.cutoffs {
            return Err(invariant("pair cutoffs", "stored cutoffs differ from the milestone tables"));
        }
        rep.verify_all(horizon).map_err(|e| invariant("pair identities", e.to_string()))?;
        rep.check_s(n + 1, horizon).map_err(|e| invariant("almost disjointness", e.to_string()))?;
        Ok(rep)
    }
}

/// When the descriptor names a reproducible builtin, its values must match
/// the stored grid.
fn check_builtin_grid(function: &FunctionRecord, points: &[Point]) -> Result<(), RepFileError> {
    let spec = match function.descriptor.parse::<FunctionSpec>() {
        Ok(FunctionSpec::Table { .. }) | Err(_) => return Ok(()),
        Ok(spec) => spec,
    };
    let f = spec.instantiate().map_err(|e| invariant("function descriptor", e.to_string()))?;
    for (i, row) in function.grid.iter().enumerate() {
        for (j, stored) in row.iter().enumerate() {
            let value = f
                .eval(Arg { position: i, point: &points[i] }, Arg { position: j, point: &points[j] })
                .map_err(|e| invariant("function descriptor", e.to_string()))?;
            if &value != stored {
                return Err(invariant(
                    "function grid",
                    format!("{} gives {value} at ({i}, {j}), file stores {stored}", function.descriptor),
                ));
            }
        }
    }
    Ok(())
}

/// Canonical JSON text of `rep`.
pub fn render_representation(rep: &Representation) -> Result<String, RepFileError> {
    let file = RepFile::from_representation(rep)?;
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    Ok(text)
}

pub fn parse_representation(text: &str) -> Result<Representation, RepFileError> {
    serde_json::from_str::<RepFile>(text)?.into_representation()
}

pub fn dump_representation(rep: &Representation, path: impl AsRef<Path>) -> Result<(), RepFileError> {
    std::fs::write(path, render_representation(rep)?)?;
    Ok(())
}

pub fn load_representation(path: impl AsRef<Path>) -> Result<Representation, RepFileError> {
    parse_representation(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::funcio::{builtin, parse_table};

    fn rep_one() -> Representation {
        let mut rep = Representation::new(Arc::new(parse_table("table:five", "5").unwrap()));
        rep.add_point(Point::bare("x0")).unwrap();
        rep
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = render_representation(&rep_one()).unwrap();
        let loaded = parse_representation(&text).unwrap();
        assert_eq!(render_representation(&loaded).unwrap(), text);
    }

    #[test]
    fn empty_round_trip() {
        let rep = Representation::new(builtin("zero").unwrap());
        let text = render_representation(&rep).unwrap();
        let loaded = parse_representation(&text).unwrap();
        assert!(loaded.is_empty());
        assert_eq!(render_representation(&loaded).unwrap(), text);
    }

    #[test]
    fn file_round_trip() {
        let mut rep = Representation::new(builtin("product").unwrap());
        for (l, v) in [("a", "1"), ("b", "-2/3"), ("c", "5")] {
            rep.add_point(Point::rational(l, rat(v))).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rep.json");
        dump_representation(&rep, &path).unwrap();
        let loaded = load_representation(&path).unwrap();
        assert_eq!(render_representation(&loaded).unwrap(), std::fs::read_to_string(&path).unwrap());
    }

    fn tamper(text: &str, edit: impl FnOnce(&mut RepFile)) -> RepFileError {
        let mut file: RepFile = serde_json::from_str(text).unwrap();
        edit(&mut file);
        file.into_representation().unwrap_err()
    }

    fn invariant_name(e: &RepFileError) -> &'static str {
        match e {
            RepFileError::Invariant { invariant, .. } => invariant,
            other => panic!("expected an invariant failure, got {other}"),
        }
    }

    #[test]
    fn tampering_is_rejected() {
        let text = render_representation(&rep_one()).unwrap();
        let e = tamper(&text, |f| f.rows[1].values[0] = rat("6"));
        assert_eq!(invariant_name(&e), "pair identities");
        let e = tamper(&text, |f| f.rows[0].values[4] = rat("1"));
        assert_eq!(invariant_name(&e), "pair identities");
        let e = tamper(&text, |f| f.rows[0].values[1] = rat("2"));
        assert_eq!(invariant_name(&e), "milestone marks");
        let e = tamper(&text, |f| f.function.grid[0][0] = rat("4"));
        assert_eq!(invariant_name(&e), "pair identities");
        let e = tamper(&text, |f| f.cutoffs[0][0] = 3);
        assert_eq!(invariant_name(&e), "pair cutoffs");
        let e = tamper(&text, |f| f.rows.swap(0, 1));
        assert_eq!(invariant_name(&e), "row order");
    }

    #[test]
    fn builtin_grid_is_cross_checked() {
        let mut rep = Representation::new(builtin("product").unwrap());
        rep.add_point(Point::rational("a", rat("2"))).unwrap();
        let text = render_representation(&rep).unwrap();
        let e = tamper(&text, |f| f.points[0].payload = Some(super::super::Payload::Rational(rat("3"))));
        assert_eq!(invariant_name(&e), "function grid");
    }

    #[test]
    fn tampered_support_is_rejected() {
        let mut rep = Representation::new(builtin("zero").unwrap());
        rep.add_point(Point::bare("a")).unwrap();
        rep.add_point(Point::bare("b")).unwrap();
        let text = render_representation(&rep).unwrap();
        let file: RepFile = serde_json::from_str(&text).unwrap();
        // put a stray value on g[1] far past every bound, at an index where
        // no other row is nonzero, so only the column check can notice it
        let horizon = file.horizon;
        let l = (horizon / 2..=horizon)
            .find(|&l| crate::adfamily::column_of(l as u64) == 0 && file.rows.iter().all(|r| r.values[l].is_zero()))
            .unwrap();
        let e = tamper(&text, |f| f.rows[2].values[l] = rat("7"));
        assert_eq!(invariant_name(&e), "almost disjointness");
    }
}
