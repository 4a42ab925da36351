//! Builtin pair functions, tables, point files and representation files.

mod builtin;
mod points;
mod repfile;
mod table;

pub use builtin::{builtin, random_table, E0Indicator, ExpSeries, FunctionSpec, Product, Zero};
pub use points::{load_points, parse_points, E0Point, Payload, Point};
pub use repfile::{
    dump_representation, load_representation, parse_representation, render_representation, FunctionRecord, RepFile, RepFileError, RowRecord,
};
pub use table::{dump_table, load_table, parse_table, TableFunction};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncError {
    #[error("unknown function descriptor {0:?}")]
    UnknownDescriptor(String),
    #[error("point {label:?} needs {expected}")]
    PayloadMismatch { label: String, expected: &'static str },
    #[error("invalid eventually constant sequence: prefix {prefix:?}, tail {tail}")]
    BadE0Point { prefix: String, tail: u8 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(String),
}
