// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CpdError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CpdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite observation {value} at t={t}")]
    NonFinite { t: usize, value: f64 },

    #[error("hazard scale lambda must be finite and > 1; got {0}")]
    InvalidLambda(f64),

    #[error("dataset id must be in 1..=6; got {0}")]
    UnknownDataset(u32),

    #[error("inputs must be strictly increasing: {0}")]
    Unsorted(&'static str),

    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("column {0:?} not found")]
    MissingColumn(String),

    #[error("country {0:?} not found")]
    UnknownCountry(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("no rows selected: {0}")]
    Empty(String),
}

impl CpdError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
