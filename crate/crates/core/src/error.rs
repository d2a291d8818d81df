use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must live over the same group do not.
    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    /// Input failed validation; `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// A computation would exceed a size guard.
    #[error("{what} exceeds guard ({size} > {limit}); {hint}")]
    Guard {
        what: String,
        size: f64,
        limit: f64,
        hint: String,
    },

    /// An element was requested that an explicit sofic map does not define.
    #[error("element {0} is not in the explicit permutation table")]
    UnknownElement(String),

    #[error("integer overflow in group arithmetic")]
    Overflow,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn guard(
        what: impl Into<String>,
        size: f64,
        limit: f64,
        hint: impl Into<String>,
    ) -> Self {
        Error::Guard {
            what: what.into(),
            size,
            limit,
            hint: hint.into(),
        }
    }

    /// True for size-guard failures, which callers may want to report
    /// differently from malformed input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}
