use alloc::string::String;
use core::fmt;

/// Errors raised by the learners, environments and checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidInput(String),
    /// Two vectors that must share a dimension did not.
    DimensionMismatch { expected: usize, found: usize },
    /// A custom adversary produced an unusable corrupted loss.
    AdversaryFault(String),
    /// An inequality check was asked to run outside the range where it is claimed.
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::AdversaryFault(msg) => write!(f, "adversary fault: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
