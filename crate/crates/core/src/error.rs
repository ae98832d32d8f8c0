use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong inside the numerical pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix shape does not fit the operation.
    Dimension(String),
    /// A NaN or infinity where finite input was required.
    NonFinite {
        row: usize,
        col: usize,
    },
    NotSquare {
        rows: usize,
        cols: usize,
    },
    NotSymmetric {
        max_asymmetry: f64,
    },
    /// An iterative routine ran out of its iteration budget.
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },
    /// Smallest eigenvalue at or below the invertibility tolerance.
    Singular {
        min_eigenvalue: f64,
    },
    /// Argument outside the domain of a function.
    Domain {
        what: &'static str,
        value: f64,
    },
    DuplicateCase(String),
    DuplicateIndicator(String),
    /// A blank cell under [`crate::dataset::MissingPolicy::Error`]; `record` is 0-based.
    MissingValue {
        record: usize,
        column: String,
    },
    TooFewCases {
        found: usize,
        required: usize,
    },
    TooFewIndicators {
        found: usize,
        required: usize,
    },
    ZeroVariance(String),
    UnknownVariable {
        name: String,
        suggestion: Option<String>,
    },
    UnknownCase(String),
    UnknownFactor(String),
    /// Kaiser retention found no eigenvalue strictly above one.
    NoFactorsRetained {
        largest_eigenvalue: f64,
    },
    TooManyFactors {
        requested: usize,
        available: usize,
    },
    /// KMO denominator is zero because every off-diagonal correlation is zero.
    KmoUndefined,
    GroupSize {
        k: usize,
        n: usize,
        max: usize,
    },
    OverlappingGroups(String),
    /// Both groups have zero spread, so the statistic is undefined.
    Degenerate(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is not square ({rows}x{cols})"),
            Error::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max |a_ij - a_ji| = {max_asymmetry:e})")
            }
            Error::NoConvergence { routine, iterations } => {
                write!(f, "{routine} did not converge within {iterations} iterations")
            }
            Error::Singular { min_eigenvalue } => {
                write!(f, "matrix is singular or near-singular (smallest eigenvalue {min_eigenvalue:e})")
            }
            Error::Domain { what, value } => write!(f, "{what} out of range: {value}"),
            Error::DuplicateCase(id) => write!(f, "duplicate case id: {id}"),
            Error::DuplicateIndicator(name) => write!(f, "duplicate indicator name: {name}"),
            Error::MissingValue { record, column } => {
                write!(f, "missing value in record {record}, column \"{column}\"")
            }
            Error::TooFewCases { found, required } => {
                write!(f, "too few cases: {found} (at least {required} required)")
            }
            Error::TooFewIndicators { found, required } => {
                write!(f, "too few indicators: {found} (at least {required} required)")
            }
            Error::ZeroVariance(name) => write!(f, "zero variance: {name}"),
            Error::UnknownVariable { name, suggestion } => {
                write!(f, "unknown variable: {name}")?;
                if let Some(s) = suggestion {
                    write!(f, " (did you mean \"{s}\"?)")?;
                }
                Ok(())
            }
            Error::UnknownCase(id) => write!(f, "unknown case id: {id}"),
            Error::UnknownFactor(sel) => write!(f, "unknown factor: {sel}"),
            Error::NoFactorsRetained { largest_eigenvalue } => {
                write!(f, "no eigenvalue exceeds 1 (largest is {largest_eigenvalue:.6}); use fixed retention instead")
            }
            Error::TooManyFactors { requested, available } => {
                write!(f, "cannot retain {requested} factors from {available} variables")
            }
            Error::KmoUndefined => {
                write!(f, "KMO undefined: all off-diagonal correlations are zero")
            }
            Error::GroupSize { k, n, max } => {
                write!(f, "group size {k} out of range for {n} cases (must be 1..={max}, floor(n/2))")
            }
            Error::OverlappingGroups(id) => write!(f, "case {id} appears in both groups"),
            Error::Degenerate(what) => write!(f, "degenerate input: {what}"),
        }
    }
}

impl core::error::Error for Error {}
