//! Configuration-driven experiment runner on top of `cascade-core`.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod problem;
pub mod run;

pub use config::{parse_config, to_canonical, ConfigError, ExperimentConfig};
pub use error::CliError;
pub use run::{run, Command, RunSummary};
