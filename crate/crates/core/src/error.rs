use std::fmt;

use thiserror::Error;

/// A single violated invariant, reported by [`crate::validate_problem`] and
/// the type constructors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl Violation {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join_violations(.0))]
    InvalidParameter(Vec<Violation>),

    #[error("non-positive price: growth factor 1 + beta*u + eps = {factor} at price {price}")]
    NonPositivePrice { price: f64, factor: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {what} = {requested} > {limit}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter(vec![Violation::new(field, message)])
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
