//! Command-line driver: configuration, corpus ingestion and experiment runs.

pub mod config;
pub mod corpus;
pub mod error;
pub mod run;

pub use config::{ExperimentConfig, Mode, Overrides};
pub use error::{CliError, Result};
pub use run::run;
