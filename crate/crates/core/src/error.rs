use std::path::PathBuf;

use thiserror::Error;

use crate::optimizer::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("mixing matrix failed validation: {0}")]
    Validation(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("theory constraint violated: {0}")]
    Constraint(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported label convention; observed labels: {observed:?}")]
    Labels { observed: Vec<String> },

    #[error("enumeration too large: {count} index sets exceed the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("diverged at step {step} on node {node}: non-finite {quantity}")]
    Divergence {
        node: usize,
        step: usize,
        quantity: &'static str,
        trace: Option<Box<Trace>>,
    },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("trace comparison failed: {0}")]
    Compare(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
