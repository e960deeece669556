use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("image header: {0}")]
    ImageHeader(#[from] crate::imgsize::HeaderError),

    #[error("{} image(s) could not be resolved: {}", .0.len(), .0.join(", "))]
    Unresolved(Vec<String>),

    #[error("invalid architecture: {field}: {reason}")]
    InvalidArch { field: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "sampling budget of {attempts} attempts exhausted with {accepted}/{requested} samples \
         (feasible proposal rate {rate:.2e}); consider a wider flop band"
    )]
    AttemptCap {
        attempts: u64,
        accepted: usize,
        requested: usize,
        rate: f64,
    },

    #[error("{} sample(s) have no score: {}", .0.len(), .0.join(", "))]
    Unscored(Vec<String>),

    #[error("config {path}: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arch(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidArch {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input data rather than bad usage.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::ImageHeader(_)
                | Error::Unresolved(_)
                | Error::Unscored(_)
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::AttemptCap { .. }
        )
    }
}
