//! Experiment engine around the core pipeline: JSON scenario configs,
//! synthetic trials against the rendering oracle, prediction-noise models,
//! CSV/JSON result persistence, and PnP timing benchmarks.

use thiserror::Error;

pub mod bench;
pub mod config;
pub mod io;
pub mod noise;
pub mod scenario;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("failed to load mesh {path}: {source}")]
    MeshLoad {
        path: String,
        source: colorpose_core::geometry::GeometryError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Config and mesh problems are the only process-fatal errors.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            HarnessError::ConfigInvalid(_) | HarnessError::MeshLoad { .. }
        )
    }
}
