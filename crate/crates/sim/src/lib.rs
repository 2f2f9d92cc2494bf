//! Experiment harness, certification suite and file formats for the
//! corrupted experts simulations in [`robust_hedge_core`].

pub mod config;
pub mod error;
pub mod harness;
pub mod suite;

pub use config::{AlgorithmConfig, CorruptionConfig, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use harness::{
    run_experiment, run_trial, splitmix64, sweep, trial_seed, AggregateRow, RunOptions, Scenario, CSV_HEADER,
};
pub use suite::{report_json, run_suite, SuiteSize};
