use std::path::PathBuf;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Syntax(String),
    #[error("invalid config ({} problem(s)):\n{}", .0.len(), list(.0))]
    Invalid(Vec<ConfigError>),
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("{0}")]
    Setup(String),
    #[error(transparent)]
    Core(#[from] sadi::Error),
}

fn list(errors: &[ConfigError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}
