//! Command-line front end: TOML configs with figure presets, and CSV/JSON
//! artifacts for coefficient tables, runs, sweeps, oracle checks and
//! trajectory batches.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod presets;

pub use config::{load, parse_config, ConfigError, ExperimentConfig, RawConfig};
pub use experiment::{
    execute, export_coefficients, oracle_check, run_experiment, run_sweep, run_trajectories,
    Artifacts, CliError, Command,
};
