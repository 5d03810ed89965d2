use std::io;
use std::path::PathBuf;

use ghpsnr_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("PLY: {0}")]
    Ply(String),
    #[error("MOS table: {0}")]
    Mos(String),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("heatmap: {0}")]
    Heatmap(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 I/O, 3 data validation, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Io { .. } => 2,
            Error::Csv(e) if e.is_io_error() => 2,
            Error::Core(
                CoreError::RankDeficient { .. }
                | CoreError::ZeroVariance(_)
                | CoreError::DegenerateNeighborhood { .. }
                | CoreError::NonFiniteSample,
            ) => 4,
            _ => 3,
        }
    }
}
