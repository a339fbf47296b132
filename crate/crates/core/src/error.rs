use alloc::string::String;

/// Errors raised by constructors and evaluators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("alphabet is empty")]
    EmptyAlphabet,

    #[error("duplicate symbol {0:?} in alphabet")]
    DuplicateSymbol(String),

    #[error("invalid symbol label {0:?}: labels must be nonempty and contain no whitespace")]
    InvalidSymbol(String),

    #[error("alphabet has {0} symbols, at most 65536 are supported")]
    AlphabetTooLarge(usize),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("negative or non-finite mass {value} at index {index}")]
    InvalidMass { index: usize, value: f64 },

    #[error("masses sum to {sum}, not 1 within tolerance")]
    NotNormalized { sum: f64 },

    #[error("alphabet mismatch")]
    AlphabetMismatch,

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("budget exceeded: {requested} entries requested, budget is {budget}; use Monte-Carlo mode")]
    BudgetExceeded { requested: u128, budget: u128 },

    #[error("head set is empty or has zero mass")]
    EmptyHeadSet,

    #[error("common part is trivial: the sources share no common variable")]
    TrivialCommonPart,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn check_budget(requested: u128, budget: usize) -> Result<()> {
    if requested > budget as u128 {
        Err(Error::BudgetExceeded { requested, budget: budget as u128 })
    } else {
        Ok(())
    }
}
