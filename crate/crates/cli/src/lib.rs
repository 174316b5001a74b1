//! Config-driven experiment runner for `sadi`.
//!
//! An experiment file (JSON) names a preset or gives an inline piecewise-affine
//! drift, and fixes the horizon, replication count, seed and overrides. See
//! `configs/` for the shipped experiments.

pub mod build;
pub mod commands;
pub mod config;
pub mod error;
pub mod runner;
pub mod sweep;

pub use build::{build, Experiment};
pub use config::{fingerprint, parse_config, parse_str, ExperimentConfig};
pub use error::CliError;
pub use runner::{run_experiment, AggregateReport, Stats};
pub use sweep::{sweep, SweepTable};

/// Runs `f` on a dedicated pool of `threads` workers (the global pool when `None`).
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|p| p.install(f))
            .map_err(|e| CliError::Setup(format!("cannot build a pool of {n} threads: {e}"))),
    }
}
