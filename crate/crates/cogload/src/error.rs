//! Shared error types.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("solver failed to converge: KKT residual {residual:.3e} after {iterations} iterations (tolerance {tolerance:.1e})")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        tolerance: f64,
    },

    #[error("degenerate document: {0}")]
    DegenerateDocument(String),

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("too few clusters: found {found}, need at least {needed}")]
    TooFewClusters { found: usize, needed: usize },

    #[error("within-transform did not converge: max group mean {residual:.3e} after {sweeps} sweeps")]
    DemeanNonConvergence { residual: f64, sweeps: usize },

    #[error("missing column: {0}")]
    MissingColumn(String),

    #[error("column {column} is not numeric: {value:?}")]
    NonNumericColumn { column: String, value: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
