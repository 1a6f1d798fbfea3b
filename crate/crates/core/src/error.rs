use alloc::string::String;

/// Errors raised by the analytics core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("empty vocabulary: {0}")]
    EmptyVocabulary(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown id: {0}")]
    UnknownId(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
