use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: a potential or structure that violates its invariants.
    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },

    /// A definition file that could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Energy or position outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    /// A computed result failed its own consistency check.
    #[error("inconsistency: {0}")]
    Consistency(String),

    #[error("at E = {energy} eV: {source}")]
    AtEnergy {
        energy: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Innermost error, skipping any energy annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtEnergy { source, .. } => source.root(),
            other => other,
        }
    }
}
