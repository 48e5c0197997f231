//! Experiment harness: configuration, seeded replications, tuning and reports.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod stats;
pub mod tune;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
