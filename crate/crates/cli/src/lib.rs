//! Experiment runner for continuized Nesterov momentum.
//!
//! `optbench <experiment> [--config FILE] [flags]` runs one of the
//! experiments in [`experiments`] and writes its CSV tables plus a
//! `summary.csv` into the output directory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ConfigFile, Experiment, Overrides, Preset, Settings};
pub use error::CliError;
pub use output::{Outcome, Summary, Table};
