use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition was checked and found violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A numerical procedure did not reach its target accuracy.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// Two objects that must share a dimension or lattice do not.
    #[error("incompatible inputs: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! precondition {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err($crate::error::Error::Precondition(format!($($arg)*)));
        }
    };
}
pub(crate) use precondition;
