//! Reproducible experiment runner for mitigated fermionic shadows.
//!
//! A run is described by one JSON [`config::ExperimentConfig`] and produces
//! one CSV of [`record::ResultRecord`]s. Built-in panel sweeps live in
//! [`figures`].

pub mod config;
pub mod figures;
pub mod record;
pub mod run;

pub use config::{ConfigError, ExperimentConfig};
pub use record::{write_csv, ResultRecord};
pub use run::{run_experiment, RunOutput};
