//! Batch front-end: TOML run configs in, run directories out.

pub mod config;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use run::{run, RunError, RunReport, EXIT_COMPUTE, EXIT_CONFIG, EXIT_OK, EXIT_UNDETERMINED};
