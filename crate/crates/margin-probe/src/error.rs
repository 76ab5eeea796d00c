//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by every stage of the pipeline.
#[derive(Debug)]
pub enum Error {
    /// Tensor or layer shape mismatch; names the operation and offending axis.
    Shape { op: &'static str, detail: String },
    /// Malformed input file (bad magic, unknown version, missing column).
    Format(String),
    /// Payload shorter or longer than its header promised.
    Length { what: &'static str, expected: usize, got: usize },
    /// A value outside its legal domain (label > 9, non-finite pixel).
    Value(String),
    /// Index out of range.
    Index { index: usize, bound: usize },
    /// Non-finite intermediate or diverging optimization.
    Numeric(String),
    /// An optimization problem with no usable solution (e.g. single-class SVM).
    Degenerate(String),
    /// Solver hit its pass budget before reaching the requested tolerance.
    Convergence { passes: usize, residual: f64 },
    /// Pipeline artifacts disagree about the sample universe.
    Consistency(String),
    /// Bad run configuration or command line.
    Config(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape { op, detail } => write!(f, "{op}: {detail}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Length { what, expected, got } => {
                write!(f, "{what}: expected {expected} bytes, got {got}")
            }
            Error::Value(msg) => write!(f, "value error: {msg}"),
            Error::Index { index, bound } => {
                write!(f, "index {index} out of range (bound {bound})")
            }
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate problem: {msg}"),
            Error::Convergence { passes, residual } => write!(
                f,
                "no convergence after {passes} passes (residual {residual:.3e})"
            ),
            Error::Consistency(msg) => write!(f, "consistency error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}
