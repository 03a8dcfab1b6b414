//! Configuration, execution and artifact output for the `jellium` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{Experiment, ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use run::{run, validate, Diagnostics, Manifest};
