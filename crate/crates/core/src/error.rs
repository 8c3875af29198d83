use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors shared by every module of the crate.
///
/// Variants fall into three families that the command line maps onto exit codes:
/// malformed input (`Parse`, `Input`, `UnknownSymbol`, `NonDefinitional`), exhausted
/// resources (`Resource`), and everything else.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("{what} exceeded the cap of {cap}")]
    Resource { what: String, cap: u64 },

    #[error("formula is not definitional: variable `{variable}` is used before it is defined")]
    NonDefinitional { variable: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn input(message: impl Into<String>) -> Self {
        Error::Input(message.into())
    }

    pub(crate) fn resource(what: impl Into<String>, cap: u64) -> Self {
        Error::Resource {
            what: what.into(),
            cap,
        }
    }

    /// True for errors caused by a cap or budget rather than by bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}
