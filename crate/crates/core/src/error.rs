use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular")]
    Singular,

    #[error("columns are linearly dependent")]
    DependentColumns,

    #[error("domain error: {0}")]
    Domain(String),

    /// A pipeline precondition does not hold; the message names the flag.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An internal consistency check failed. Results are never returned past one of these.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// A quantity does not fit the machine integers used by the enumeration engines.
    #[error("value out of range for enumeration: {0}")]
    Overflow(String),

    #[error("branch-and-bound node limit of {0} exhausted")]
    NodeLimit(usize),

    #[error("instance generation exhausted after {attempts} attempts")]
    GenerationExhausted { attempts: usize },

    #[error("invalid document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
