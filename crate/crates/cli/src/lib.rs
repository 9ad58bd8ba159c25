//! Config-driven experiment runner. Each experiment kind lives behind the
//! [`experiments::ExperimentRegistry`]; a run is schema validation, physics
//! preflight, the experiment itself and the CSV/JSON outputs.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod preflight;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
