use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular value decomposition did not converge")]
    SvdFailure,
    #[error("entry ({row}, {col}) is nonzero but lies outside the multiplier support")]
    OffSupport { row: usize, col: usize },
    #[error("spectrum escapes the symbol domain at {0}")]
    SpectrumEscape(String),
    #[error("element {0} is not in the group")]
    NotInGroup(String),
    #[error("empty window")]
    EmptyWindow,
    #[error("input is not selfadjoint")]
    NotSelfAdjoint,
    #[error("support too large: {size} entries (limit {limit})")]
    SupportTooLarge { size: usize, limit: usize },
    #[error("search exhausted: {0}")]
    Exhausted(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
