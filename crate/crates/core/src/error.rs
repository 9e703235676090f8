use thiserror::Error;

/// Errors raised by the algebra, coding, audit and simulation layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("field mismatch: GF({left}) vs GF({right})")]
    FieldMismatch { left: u32, right: u32 },

    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear system has no unique solution")]
    SingularSystem,

    #[error("field GF({q}) too small: {reason}")]
    FieldTooSmall { q: u32, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("message has {got} symbols, expected a positive multiple of {unit}")]
    ShortMessage { got: usize, unit: usize },

    #[error("need {needed} helpers, got {got}")]
    NotEnoughHelpers { needed: usize, got: usize },

    #[error("need {needed} shares, got {got}")]
    NotEnoughShares { needed: usize, got: usize },

    #[error("{erased} erasures exceed the declared budget {budget}")]
    TooManyErasures { erased: usize, budget: usize },

    #[error("decoding failed: {0}")]
    DecodeFailure(String),

    #[error("enumeration needs {needed} cases, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("invalid share: {0}")]
    InvalidShare(String),

    #[error("malformed share file: {0}")]
    Format(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::FieldMismatch { .. } => "FieldMismatch",
            Error::NotPrime(_) => "NotPrime",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::SingularSystem => "SingularSystem",
            Error::FieldTooSmall { .. } => "FieldTooSmall",
            Error::InvalidParams(_) => "InvalidParams",
            Error::ShortMessage { .. } => "ShortMessage",
            Error::NotEnoughHelpers { .. } => "NotEnoughHelpers",
            Error::NotEnoughShares { .. } => "NotEnoughShares",
            Error::TooManyErasures { .. } => "TooManyErasures",
            Error::DecodeFailure(_) => "DecodeFailure",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::InvalidShare(_) => "InvalidShare",
            Error::Format(_) => "Format",
            Error::InvalidEvent(_) => "InvalidEvent",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
