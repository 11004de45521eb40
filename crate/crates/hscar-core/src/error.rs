use alloc::string::String;

/// Errors shared by every module of the crate.
///
/// The variants line up with the exit codes of the command line tool:
/// geometry and contract problems are caller errors, capacity errors mean the
/// request is too large for the chosen method, numerical errors mean an
/// algorithm failed to reach its tolerance.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
