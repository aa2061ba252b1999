//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration (grids, tolerances, step sizes, file contents).
    #[error("configuration error: {0}")]
    Config(String),

    /// The moment integral has no finite value (survival tail too heavy).
    #[error("non-integrable moment: {0}")]
    NonIntegrable(String),

    /// An empirical model's censoring cutoff truncates more mass than tolerated.
    #[error("censored tail mass above tolerance: {0}")]
    CensoredTail(String),

    /// Source and target regions are disconnected by obstacles.
    #[error("target unreachable: {0}")]
    Unreachable(String),

    /// A polyline segment passes through an obstacle cell.
    #[error("path crosses an obstacle at ({x}, {y})")]
    ObstacleCrossing { x: f64, y: f64 },

    /// Least-squares fit residual exceeded the configured threshold.
    #[error("fit failure: residual {residual:e} exceeds threshold {threshold:e}")]
    FitFailure { residual: f64, threshold: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics itself rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonIntegrable(_) | Error::CensoredTail(_) | Error::Unreachable(_)
        )
    }
}
