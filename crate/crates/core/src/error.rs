//! Error type shared across the crate.

use std::fmt;

/// Errors produced by polynomial, assembly and estimation operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point or coefficient vector has the wrong length.
    DimensionMismatch { expected: usize, got: usize },
    /// Interval bounds violate `a < b`.
    InvalidInterval { a: f64, b: f64 },
    /// Operation requires a nonzero polynomial.
    ZeroPolynomial,
    /// Gram matrix sizes do not match the degree/parity rule.
    GramShape(String),
    /// A training target lies outside the configured range.
    TargetOutsideRange { index: usize, value: f64, a: f64, b: f64 },
    /// The sample set is empty.
    EmptySampleSet,
    /// Whole-line certificates require an even certificate degree.
    OddDegreeWholeLine { degree: usize },
    /// The conic solver stopped with a non-optimal status.
    SolverNotOptimal(String),
    /// The Lebesgue objective is unbounded below for this configuration.
    ObjectiveUnbounded,
    /// The model carries no Gram certificates.
    MissingCertificates,
    /// The model carries no slack information (polynomial or per-sample).
    MissingSlack,
    /// The requested quantity needs a polynomial slack, not per-sample scalars.
    PerSampleSlackUnsupported(String),
    /// Unknown target function name.
    UnknownTarget(String),
    /// Malformed configuration or parameters.
    InvalidParams(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidInterval { a, b } => {
                write!(f, "invalid interval: [{a}, {b}] (need a < b)")
            }
            Error::ZeroPolynomial => write!(f, "polynomial is identically zero"),
            Error::GramShape(msg) => write!(f, "gram matrix shape: {msg}"),
            Error::TargetOutsideRange { index, value, a, b } => {
                write!(f, "target {value} at sample {index} lies outside [{a}, {b}]")
            }
            Error::EmptySampleSet => write!(f, "sample set is empty"),
            Error::OddDegreeWholeLine { degree } => {
                write!(f, "whole-line certificate needs even degree, got {degree}")
            }
            Error::SolverNotOptimal(status) => write!(f, "solver status not optimal: {status}"),
            Error::ObjectiveUnbounded => {
                write!(f, "objective unbounded: use empirical mode")
            }
            Error::MissingCertificates => write!(f, "model carries no certificates"),
            Error::MissingSlack => write!(f, "model carries no slack information"),
            Error::PerSampleSlackUnsupported(what) => {
                write!(f, "{what} is undefined in per-sample slack mode")
            }
            Error::UnknownTarget(name) => write!(f, "unknown target function: {name}"),
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
