use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The parameters are valid but leave no usable cleartext space.
    #[error("degenerate parameter: {0}")]
    Degenerate(String),

    /// `x^bound != 1`, so the claimed order bound is wrong.
    #[error("element does not have order dividing {bound}")]
    InconsistentOrder { bound: String },

    /// The discrete logarithm target is outside the subgroup spanned by the base.
    #[error("target is not in the subgroup generated by the base")]
    NoSolution,

    /// No plaintext in `[0, r)` matches the ciphertext.
    #[error("ciphertext does not decrypt under this key")]
    InvalidCiphertext,

    /// The input is too large for an exhaustive operation.
    #[error("input exceeds guard: {0}")]
    Guard(String),

    /// A sampling loop hit its retry cap.
    #[error("retry limit exhausted: {0}")]
    RetryExhausted(String),

    /// Malformed text input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
