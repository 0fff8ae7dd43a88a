//! Error types shared across the library.
//!
//! Jet arithmetic reports domain problems through [`JetError`]; it knows the
//! offending value but not where on a chart it happened. Everything that
//! evaluates at a chart point wraps those into [`Error::SingularPoint`] so the
//! failing point travels with the error.

use std::fmt;

/// Failure inside raw jet arithmetic (no chart point attached yet).
#[derive(Debug, Clone, PartialEq)]
pub enum JetError {
    /// Seed index outside the variable range.
    IndexOutOfRange { index: usize, dim: usize },
    /// Division by a jet whose value is zero.
    DivisionByZero,
    /// Elementary function evaluated outside its smooth domain.
    Domain { func: &'static str, value: f64 },
}

impl fmt::Display for JetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetError::IndexOutOfRange { index, dim } => {
                write!(f, "seed index {index} out of range for dimension {dim}")
            }
            JetError::DivisionByZero => write!(f, "division by a zero-valued jet"),
            JetError::Domain { func, value } => {
                write!(f, "{func} evaluated outside its smooth domain at {value}")
            }
        }
    }
}

impl std::error::Error for JetError {}

/// Library-level error.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Caller passed an argument that violates an operation's preconditions.
    InvalidArgument(String),
    /// Evaluation hit a point where the data is not smooth (division by zero,
    /// fractional power at zero, ...).
    SingularPoint { point: Vec<f64>, source: JetError },
    /// Metric failed the positive-definiteness check at a point.
    DegenerateMetric { point: Vec<f64> },
    /// p-Laplacian with p < 4 where the energy density vanishes.
    VanishingEnergy { point: Vec<f64>, p: f64 },
    /// Profile equation has no real slope for this constant.
    InfeasibleConstant { c: f64, minimum: f64 },
    /// Requested pendulum regime does not contain the given constant.
    WrongRegime { c: f64, k_sq: f64, hint: String },
    /// Blow-up probe on a horizontally conformal matrix (the sequence would
    /// be identically zero).
    DegenerateProbe,
    /// Catalog lookup with an id that is not registered.
    UnknownEntry(String),
    /// A builder rejected one of its input components.
    InvalidComponent { index: usize, reason: String },
    /// Conformal factor not strictly positive at a sampled point.
    InvalidFactor { point: Vec<f64>, value: f64 },
    /// Point outside the chart's declared domain.
    OutOfDomain { point: Vec<f64>, reason: String },
    /// Expression-grammar parse failure (column is 1-based within the text).
    Parse { context: String, column: usize, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SingularPoint { point, source } => {
                write!(f, "singular point at {point:?}: {source}")
            }
            Error::DegenerateMetric { point } => {
                write!(f, "metric is not positive definite at {point:?}")
            }
            Error::VanishingEnergy { point, p } => {
                write!(f, "energy density vanishes at {point:?}; p = {p} needs |d\u{3c6}| > 0")
            }
            Error::InfeasibleConstant { c, minimum } => {
                write!(f, "constant {c} is below the feasibility threshold {minimum}")
            }
            Error::WrongRegime { c, k_sq, hint } => {
                write!(f, "constant {c} is not in the circulating regime (needs C > k\u{b2} = {k_sq}); {hint}")
            }
            Error::DegenerateProbe => {
                write!(f, "matrix is horizontally conformal; the blow-up sequence is identically zero")
            }
            Error::UnknownEntry(id) => write!(f, "unknown catalog entry `{id}`"),
            Error::InvalidComponent { index, reason } => {
                write!(f, "component {index} rejected: {reason}")
            }
            Error::InvalidFactor { point, value } => {
                write!(f, "conformal factor must be positive; got {value} at {point:?}")
            }
            Error::OutOfDomain { point, reason } => {
                write!(f, "point {point:?} outside domain: {reason}")
            }
            Error::Parse { context, column, message } => {
                write!(f, "parse error in {context} at column {column}: {message}")
            }
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    /// Attach a chart point to a raw jet failure.
    pub fn at_point(point: &[f64], source: JetError) -> Self {
        Error::SingularPoint { point: point.to_vec(), source }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
