//! Configuration, file formats and subcommands of the `sqg` binary.
//!
//! Outputs of a run directory:
//!
//! | file | command | content |
//! |------|---------|---------|
//! | `report.json`, `iterations.csv` | solve | convergence history and final block |
//! | `theta0.sqgf`, `trajectory/theta_*.sqgf` | solve, linear, evolve | field snapshots |
//! | `besov_theta0.csv` | solve | `j, 2^{s_c j}‖Δ_jθ₀‖_p` |
//! | `linear_report.json` | linear | residuals of the linear periodic problem |
//! | `evolve_report.json` | evolve | initial-value run summary |
//! | `probes.json`, `probe_ratios.csv` | verify | estimate-ratio probes |
//! | `besov.json`, `besov_spectrum.csv` | besov | norm and per-block spectrum |
//! | `meta.json` | all | config hash, timings, exit code |
//!
//! Everything except `meta.json` is a deterministic function of the
//! configuration.

pub mod commands;
pub mod config;
pub mod error;
pub mod json;
pub mod report;
pub mod snapshot;

pub use commands::{run, Command};
pub use config::{LoadedConfig, RunConfig};
pub use error::{exit, CliError};
