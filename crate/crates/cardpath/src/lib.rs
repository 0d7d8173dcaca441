//! Experiment runner for `cardpath-core`: a flat `key = value` config
//! format, parallel drivers for the propagators, and CSV/JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod parallel;

pub use cardpath_core as core;
pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, ExitCode};
pub use experiments::{run_experiment, write_report, Report};
