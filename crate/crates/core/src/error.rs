use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input: unknown ids, non-permutation lists, non-positive values.
    /// `path` locates the offending field (e.g. `priorities.lists[1]`).
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    /// A documented precondition of an operation does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Exhaustive enumeration would exceed the configured profile cap.
    #[error("refusing to enumerate {required} profiles (cap {cap}); raise the cap or force")]
    CapExceeded { required: u128, cap: u128 },

    /// A ratio over the equilibrium set was requested but the game has none.
    #[error("undefined: the game has no pure Nash equilibrium")]
    NoEquilibrium,

    /// An internal invariant was violated; always a bug or an unhandled case.
    #[error("internal invariant failure: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
