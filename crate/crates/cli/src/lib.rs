//! Experiment runner: config files, multi-worker sampling with checkpoints,
//! reports and CSV export. The `seplab` binary is a thin layer over this.

pub mod analyze;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, FitSpec};
pub use error::{CliError, CliResult};
pub use report::{export, ExperimentReport};
pub use runner::{resume, run_experiment, run_from, RunControl, RunOutcome};
