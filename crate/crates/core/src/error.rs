use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the covariance-matrix toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The SDP engine could not reach a trustworthy answer. Callers must treat
    /// the affected verdict as unresolved.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Labels along a bracket went backwards (e.g. SEP followed by NPT).
    #[error("re-entrant phase between grid points {offending:?}")]
    ReentrantPhase { offending: Vec<(f64, String)> },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
