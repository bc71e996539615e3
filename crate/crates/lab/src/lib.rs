//! Experiment runner for `holderlab-core`: configuration, parallel batches
//! and report files.
//!
//! Every experiment is a deterministic function of its configuration. Path,
//! walk and sample `i` draw from the random stream `(seed, i)`, and batches are
//! collected in index order, so the thread count never changes an output.

pub mod config;
pub mod experiments;
pub mod io;
pub mod report;

use std::path::PathBuf;

pub use config::{Band, Experiment, ExperimentConfig, Overrides, SetKind};
pub use experiments::run_experiment;
pub use report::{emit_report, parse_report, Format, Report, Statistic};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] holderlab_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("configuration: {0}")]
    Config(String),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}
