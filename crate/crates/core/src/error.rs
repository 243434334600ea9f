use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution, generator or cost was constructed from inconsistent parameters.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// The operation is not defined for this kind of input.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The scale function vanished away from the origin; no convention covers this case.
    #[error("singular scaling: W({u}, {v}) = 0")]
    SingularScaling { u: f64, v: f64 },

    /// A user-supplied closure returned NaN.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A precondition of the operation failed (e.g. a validity condition on the generator).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A spec string or input file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// The dual ascent did not produce a finite bound.
    #[error("dual ascent diverged: {0}")]
    DivergentAscent(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used in JSON error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParameters(_) => "invalid_parameters",
            Error::Unsupported(_) => "unsupported",
            Error::SingularScaling { .. } => "singular_scaling",
            Error::NonFinite(_) => "non_finite",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
            Error::DivergentAscent(_) => "divergent_ascent",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
