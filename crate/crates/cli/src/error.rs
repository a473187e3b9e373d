use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write output: {0}")]
    Output(#[source] std::io::Error),

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {message}")]
    DimensionMismatch { path: PathBuf, message: String },

    #[error("cannot write trace {path}: {message}")]
    Trace { path: PathBuf, message: String },

    #[error(transparent)]
    Numerical(#[from] posprod::Error),
}
