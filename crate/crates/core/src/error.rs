use thiserror::Error;

/// Errors raised by table, factorization and compression routines.
///
/// Validation findings (a column that does not sum to one, a product that
/// does not reproduce the table) are not errors; they are reported through
/// [`crate::ValidationReport`]. `Error` is reserved for inputs that cannot be
/// processed at all.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Declared dimensions disagree with the data that was supplied.
    #[error("structural error: {0}")]
    Structural(String),

    /// Malformed input document.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// An operation that requires a valid data table was handed an invalid one.
    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// An operation that requires a verified factorization was handed one
    /// that does not satisfy `D = MP`.
    #[error("invalid factorization: {0}")]
    InvalidFactorization(String),

    /// A configured size cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Born probabilities could not be turned into an exactly normalized
    /// rational table at the requested tolerance.
    #[error("rationalization failed: {0}")]
    Rationalization(String),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
