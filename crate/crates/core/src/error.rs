use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Precondition and domain errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("distributions have disjoint supports")]
    DisjointSupports,

    #[error("family needs at least 2 members, got {0}")]
    TooFewMembers(usize),

    #[error("members {0} and {1} are not distinct (sup-norm distance <= 1e-9)")]
    NotDistinct(usize, usize),

    #[error("invalid family spec: {0}")]
    InvalidFamilySpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("invalid log-likelihood matrix: {0}")]
    InvalidMatrix(String),

    #[error("no permutation has a finite total score")]
    Infeasible,

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exponent unestimable: {0}")]
    Unestimable(String),

    #[error("output error: {0}")]
    Io(String),
}
