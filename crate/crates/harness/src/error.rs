use thiserror::Error;

use crate::checkpoint::CheckpointError;
use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Core(#[from] surfns_core::Error),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Unsupported(String),
}

impl HarnessError {
    /// Process exit status: 3 for a divergence, 2 for everything else that
    /// stops a run before its checks are evaluated.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(surfns_core::Error::Divergence { .. }) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
