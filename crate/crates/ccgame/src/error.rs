use thiserror::Error;

/// Error raised by matrix construction, search, and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Ragged grids, dimension mismatches.
    #[error("shape error: {0}")]
    Shape(String),
    /// Inputs outside an operation's domain (bad indices, values, parameters).
    #[error("domain error: {0}")]
    Domain(String),
    /// A construction or search refused because it exceeds a size policy.
    #[error("size error: {0}")]
    Size(String),
    /// A stated precondition does not hold for the given arguments.
    #[error("precondition error: {0}")]
    Precondition(String),
    /// A protocol tree is malformed (blocks do not partition live indices).
    #[error("structure error: {0}")]
    Structure(String),
    /// Unknown identifiers or malformed requests.
    #[error("usage error: {0}")]
    Usage(String),
    /// Serialized data that does not match the expected schema.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable kind tag, used by the CLI error stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Domain(_) => "domain",
            Error::Size(_) => "size",
            Error::Precondition(_) => "precondition",
            Error::Structure(_) => "structure",
            Error::Usage(_) => "usage",
            Error::Format(_) => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
