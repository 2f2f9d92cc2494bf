use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("failed to parse config {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("trial {trial} of {algorithm} (C = {budget}) aborted: {source}")]
    Trial {
        algorithm: &'static str,
        budget: f64,
        trial: u64,
        #[source]
        source: robust_hedge_core::Error,
    },
    #[error(transparent)]
    Core(#[from] robust_hedge_core::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
