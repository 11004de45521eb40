use std::path::PathBuf;

/// Failures surfaced by the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hscar_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("lattice file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status: 2 config, 3 capacity, 4 numerical, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        use hscar_core::Error as E;
        match self {
            Self::Config(_) | Self::Json(_) => 2,
            Self::Core(E::Geometry(_) | E::Contract(_)) => 2,
            Self::Core(E::Capacity(_)) => 3,
            Self::Core(E::Numerical(_) | E::Fit(_)) => 4,
            Self::Io { .. } | Self::Csv(_) => 1,
        }
    }
}

macro_rules! config_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Config(format!($($arg)*))
    };
}
pub(crate) use config_err;
