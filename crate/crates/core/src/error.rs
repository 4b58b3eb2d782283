use thiserror::Error;

use crate::weights::WeightDomain;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("weight domain mismatch: {0} vs {1}")]
    DomainMismatch(WeightDomain, WeightDomain),
    #[error("matrix size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("natural number overflow")]
    Overflow,
    #[error("repeated bound k={k} out of range 0..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("state {state} out of range 1..={n}")]
    StateOutOfRange { state: usize, n: usize },
    #[error("letter not in alphabet: {0}")]
    ForeignLetter(String),
    #[error("empty period")]
    EmptyPeriod,
    #[error("start counter must be at least 1")]
    ZeroCounter,
    #[error("unsupported for domain {0}: {1}")]
    Unsupported(WeightDomain, &'static str),
    #[error("malformed weight literal: {0}")]
    MalformedWeight(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{n} states exceed the supported maximum of {max} for this operation")]
    TooManyStates { n: usize, max: usize },
    #[error("grammar document: {0}")]
    GrammarDocument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
