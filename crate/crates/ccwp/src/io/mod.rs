//! Configuration, coefficient-dataset, and time-series file handling, plus
//! the simulation trace writer.

pub mod config;
pub mod curves;
pub mod series;
pub mod trace;

pub use config::{load_config, PlantConfig};
pub use curves::CurveDb;
pub use series::{load_series, synth_series, write_series, ExogenousSeries};
pub use trace::{read_trace, Trace, TraceWriter};

use thiserror::Error;

/// Errors from file loading, parsing, and validation.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: parse error: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: validation failed:\n  - {}", failures.join("\n  - "))]
    Validation { path: String, failures: Vec<String> },
    #[error("unknown curve set '{0}' (not in the bundled dataset or any loaded curve file)")]
    UnknownCurves(String),
    #[error(transparent)]
    Model(#[from] crate::error::ModelError),
}

impl IoError {
    pub(crate) fn read(path: &std::path::Path, source: std::io::Error) -> Self {
        IoError::Read {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: &std::path::Path, message: impl Into<String>) -> Self {
        IoError::Parse {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}
