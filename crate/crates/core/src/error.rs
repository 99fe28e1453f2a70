use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the HNN pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("parse failure at row {row}, column {column:?}: {value:?} is not a finite number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("ragged input: row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("column {0:?} has zero variance")]
    ConstantColumn(String),

    #[error("all columns are constant")]
    AllConstant,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("graph is not chordal")]
    NotChordal,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("simplex list is not closed under faces: facet {0:?} is missing")]
    MissingFacet(Vec<usize>),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),

    #[error("singular system: {0}")]
    Singular(String),
}

impl Error {
    /// Coarse class used in user-facing error reports.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv(_) | Error::Json(_) | Error::Empty(_) | Error::Parse { .. } | Error::Ragged { .. } => "input",
            Error::ConstantColumn(_) | Error::AllConstant | Error::Degenerate(_) | Error::Dimension(_) => "data",
            Error::NotSymmetric(..) | Error::NotChordal | Error::InvalidGraph(_) | Error::MissingFacet(_) => "graph",
            Error::NonFinite(_) | Error::Diverged { .. } | Error::Singular(_) => "numeric",
            Error::Config(_) | Error::Checkpoint(_) => "config",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
