//! Monte-Carlo experiment harness for `sparsense-core`: experiment
//! configuration files, the trial runner, aggregation and CSV output, and
//! the randomized property and oracle suites behind the `verify` and
//! `oracle` commands.

pub mod config;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod report;
pub mod stats;
pub mod verify;

pub use error::{HarnessError, Result};
pub use experiment::{run_trial, run_trials, ExperimentSpec, TrialRecord};
