use alloc::string::String;
use core::fmt;

/// Errors reported by the library.
///
/// Variants are grouped by origin: word grammar, measure validation, and
/// operation preconditions.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The word text does not match the grammar `a<k>` / `a<k>^<e>` / `e`.
    WordSyntax(String),
    /// A generator index lies outside `1..=rank`.
    GeneratorOutOfRange { index: usize, rank: usize },
    /// The identity was passed where a nonidentity word is required.
    IdentityNotAllowed(&'static str),
    /// A measure failed validation (details in the message).
    InvalidMeasure(String),
    /// The operation needs a nearest-neighbour support (`max_range == 1`).
    NotNearestNeighbour { max_range: usize },
    /// The operation needs a powers-of-generators support.
    NotPowersSupport,
    /// The operation needs an antisymmetric measure.
    NotAntisymmetric,
    /// The operation needs a symmetric measure.
    NotSymmetric,
    /// The target word is a member of the avoid set.
    TargetInAvoid,
    /// The start word is a member of the set it must avoid.
    StartInSet,
    /// Tolerance must be strictly positive.
    NonPositiveTolerance,
    /// Consecutive chain sets must be disjoint.
    ChainOverlap { position: usize },
    /// A barrier precondition failed (details in the message).
    BarrierPrecondition(String),
    /// A linear system was singular to working precision.
    SingularSystem,
    /// A required input value was not supplied.
    MissingValue(String),
    /// A parameter is outside its documented domain.
    BadParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::WordSyntax(msg) => write!(f, "word syntax error: {msg}"),
            Error::GeneratorOutOfRange { index, rank } => {
                write!(f, "generator index {index} out of range 1..={rank}")
            }
            Error::IdentityNotAllowed(what) => {
                write!(f, "identity word not allowed as {what}")
            }
            Error::InvalidMeasure(msg) => write!(f, "invalid measure: {msg}"),
            Error::NotNearestNeighbour { max_range } => {
                write!(f, "support has range {max_range}, need nearest-neighbour (range 1)")
            }
            Error::NotPowersSupport => {
                write!(f, "support is not of powers-of-generators form")
            }
            Error::NotAntisymmetric => write!(f, "measure is not antisymmetric"),
            Error::NotSymmetric => write!(f, "measure is not symmetric"),
            Error::TargetInAvoid => write!(f, "target word lies in the avoid set"),
            Error::StartInSet => write!(f, "start word lies in the set to avoid"),
            Error::NonPositiveTolerance => write!(f, "tolerance must be positive"),
            Error::ChainOverlap { position } => {
                write!(f, "chain sets {position} and {} overlap", position + 1)
            }
            Error::BarrierPrecondition(msg) => write!(f, "barrier precondition: {msg}"),
            Error::SingularSystem => write!(f, "linear system is singular"),
            Error::MissingValue(msg) => write!(f, "missing value: {msg}"),
            Error::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
