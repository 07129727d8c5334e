use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero input")]
    ZeroInput,
    #[error("zero has no class")]
    ZeroHasNoClass,
    #[error("symbol entry must be a unit")]
    NonUnitEntry,
    #[error("pole at place")]
    PoleAtPlace,
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("mismatched fields: {0}")]
    FieldMismatch(String),
    #[error("{0} is not a recognized subfield")]
    NotASubfield(String),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(i32, i32),
    #[error("degree {0} outside the supported window")]
    DegreeOverflow(i32),
    #[error("extension degree {0} exceeds the cap {1}")]
    ExtensionTooLarge(u32, u32),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid place: {0}")]
    InvalidPlace(String),
    #[error("contraction precondition failed at places: {0:?}")]
    NotContractible(Vec<String>),
    #[error("invalid twist: {0}")]
    InvalidTwist(String),
    #[error("approximation did not converge after {rounds} rounds; open places: {open:?}")]
    ApproximationFailed { rounds: usize, open: Vec<String> },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("assertion {check} failed; witness: {witness}")]
    AssertionFailed { check: String, witness: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
