use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// Input vector has the wrong length.
    DimensionMismatch { expected: usize, found: usize },
    /// A list that must be nonempty was empty.
    Empty(&'static str),
    /// Expression tree uses a construct the surrogate builder cannot smooth.
    UnsupportedAtom(String),
    /// Objectives were declared with different nonsmooth terms.
    DistinctNonsmoothTerms,
    /// Dual weights are not on the unit simplex.
    OffSimplex { sum: f64, min: f64 },
    /// Backtracking kept inflating the Lipschitz estimate.
    DivergingLipschitz { inflations: usize, last_l: f64 },
    /// Too few usable points for a regression.
    InsufficientData { needed: usize, found: usize },
    /// A problem name or index did not resolve.
    UnknownProblem(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Empty(what) => write!(f, "{what} must be nonempty"),
            Error::UnsupportedAtom(atom) => write!(f, "unsupported atom: {atom}"),
            Error::DistinctNonsmoothTerms => {
                write!(f, "all objectives must share the same nonsmooth term g")
            }
            Error::OffSimplex { sum, min } => {
                write!(f, "weights off the simplex (sum = {sum}, min = {min})")
            }
            Error::DivergingLipschitz { inflations, last_l } => write!(
                f,
                "Lipschitz estimate diverged after {inflations} inflations (L = {last_l})"
            ),
            Error::InsufficientData { needed, found } => {
                write!(f, "insufficient data: need {needed} points, found {found}")
            }
            Error::UnknownProblem(name) => write!(f, "unknown problem: {name}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
