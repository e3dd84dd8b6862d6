use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha is not a fixed-point-free involution at dart {0}")]
    NotInvolution(usize),
    #[error("{0} is not a permutation of the darts")]
    NotPermutation(&'static str),
    #[error("rotation system is disconnected")]
    Disconnected,
    #[error("rotation system is not planar (v - e + f = {0})")]
    NonPlanar(i64),
    #[error("root dart {0} is out of range")]
    BadRoot(usize),
    #[error("marked vertex {0} is not a vertex of the map")]
    BadMark(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid weight sequence: {0}")]
    Domain(String),
    #[error("no admissible solution: {0}")]
    NoSolution(String),
    #[error("iteration budget exhausted: {0}")]
    NonConvergence(String),
    #[error("criticality matrix is singular at x = 1")]
    SingularPoint,
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("model has no admissible solution")]
    UnsolvedModel,
    #[error("model is not critical: {0}")]
    NotCritical(String),
    #[error("tree exceeded the size budget of {0} vertices")]
    SizeBudgetExceeded(usize),
    #[error("series truncation {truncation} is below the requested size {requested}")]
    TruncationTooSmall { truncation: usize, requested: usize },
    #[error("conditioning event is empty: {0}")]
    EmptyEvent(String),
    #[error("rejection sampling gave up after {attempts} attempts (expected acceptance {expected_acceptance:e})")]
    Timeout { attempts: u64, expected_acceptance: f64 },
    #[error("malformed mobile: {0}")]
    MalformedMobile(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("exploration exceeded the budget of {0} steps")]
    ExplorationBudget(u64),
    #[error("replica {replica} at n = {n}: {source}")]
    Replica { n: usize, replica: usize, source: Box<Error> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name, used for JSON error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotInvolution(_) => "NotInvolution",
            Error::NotPermutation(_) => "NotPermutation",
            Error::Disconnected => "Disconnected",
            Error::NonPlanar(_) => "NonPlanar",
            Error::BadRoot(_) => "BadRoot",
            Error::BadMark(_) => "BadMark",
            Error::Parse(_) => "ParseError",
            Error::Domain(_) => "DomainError",
            Error::NoSolution(_) => "NoSolution",
            Error::NonConvergence(_) => "NonConvergence",
            Error::SingularPoint => "SingularPoint",
            Error::NumericalInstability(_) => "NumericalInstability",
            Error::UnsolvedModel => "UnsolvedModel",
            Error::NotCritical(_) => "NotCritical",
            Error::SizeBudgetExceeded(_) => "SizeBudgetExceeded",
            Error::TruncationTooSmall { .. } => "TruncationTooSmall",
            Error::EmptyEvent(_) => "EmptyEvent",
            Error::Timeout { .. } => "Timeout",
            Error::MalformedMobile(_) => "MalformedMobile",
            Error::TypeMismatch(_) => "TypeMismatch",
            Error::ExplorationBudget(_) => "ExplorationBudget",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "IoError",
            Error::Replica { source, .. } => source.kind(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
