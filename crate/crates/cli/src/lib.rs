//! Command-line driver for the letter-network experiments.

pub mod config;
pub mod error;
pub mod manifest;
pub mod runner;

pub use config::{Experiment, RunConfig};
pub use error::{CliError, Result};
pub use runner::{run_experiment1, run_experiment2, run_gradcheck};
