use std::path::Path;

use thiserror::Error;

/// Problems with configuration, machine tables, label files and other
/// inputs read before a run starts.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("{0}")]
    Value(String),
}

impl LoadError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        LoadError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

/// A trace file that cannot be parsed back into moves.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("trace is for variant {found}, expected {expected}")]
    VariantMismatch { expected: String, found: String },
}
