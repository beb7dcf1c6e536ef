//! Effectively open sets at finite scale: unions of cylinders in Cantor
//! space, and threshold sets in a product of unit intervals.

pub mod interval;
pub mod product;

pub use interval::{escape_sequence, Escape, IntervalSet};
pub use product::{parse_dyadics, series_to_open, ProductOpenSet};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoveringError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("term {index} is {value}, outside (0, 1)")]
    OutOfRange { index: usize, value: String },
    #[error("{0}")]
    Value(String),
}
