use thiserror::Error;

/// Errors raised by the library and surfaced by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric (max |A - A^T| = {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point is outside the effective domain ({0})")]
    NotInDomain(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective is not proper: {0}")]
    NotProper(String),

    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("unknown catalog instance `{0}`")]
    UnknownCatalog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
