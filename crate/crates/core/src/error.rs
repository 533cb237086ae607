use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("invalid truncation order: {0}")]
    InvalidOrder(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    #[error("constant term must be nonzero: {0}")]
    ZeroConstantTerm(String),

    #[error("substitution has a nonzero constant term in component {0}")]
    NonzeroConstantTerm(usize),

    #[error("operand of degree {0} is not allowed here")]
    InvalidDegree(usize),

    #[error("matrix is not skew-symmetric")]
    NotSkew,

    #[error("matrix is singular")]
    Singular,

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("form is not closed: {0}")]
    NotClosed(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
