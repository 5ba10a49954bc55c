use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix failed the density-operator checks.
    #[error("not a state: {0}")]
    NotAState(String),

    /// The Fock cutoff is too small for the requested accuracy.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A quadrature did not reach the requested tolerance.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// Incompatible dimensions or cutoffs.
    #[error("shape error: {0}")]
    Shape(String),

    /// A documented precondition (operator bounds, mode count) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Prefixes the message with the name of the check that raised it.
    pub fn in_check(self, name: &str) -> Self {
        let tag = |m: String| format!("{name}: {m}");
        match self {
            Error::Domain(m) => Error::Domain(tag(m)),
            Error::NotAState(m) => Error::NotAState(tag(m)),
            Error::Truncation(m) => Error::Truncation(tag(m)),
            Error::Accuracy(m) => Error::Accuracy(tag(m)),
            Error::Shape(m) => Error::Shape(tag(m)),
            Error::Precondition(m) => Error::Precondition(tag(m)),
            Error::Parse(m) => Error::Parse(tag(m)),
            other => other,
        }
    }
}
