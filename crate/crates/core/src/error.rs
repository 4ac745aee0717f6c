use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operands live over different algebras or modules, or a matrix has the
    /// wrong shape for its slot.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input data violates a structural requirement (A-linearity, unit
    /// vectors, parameter ranges, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// An operation was called outside its mathematical domain, e.g. an
    /// ellipticity constant for a form that is not positive.
    #[error("domain error: {0}")]
    Domain(String),

    /// A problem file could not be read; `location` is a JSON path.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
