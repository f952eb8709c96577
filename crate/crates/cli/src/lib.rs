//! Command implementations behind the `couette` binary.
//!
//! Every command maps a resolved [`RunConfig`] to an [`Outcome`]: the primary
//! artifact (CSV or JSON text) plus a pass flag. The binary decides where the
//! text goes and turns the flag into an exit status.

pub mod commands;
pub mod config;
pub mod svg;

pub use config::RunConfig;

use couette_core::Execution;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or inconsistent configuration. Exit status 2.
    #[error("{0}")]
    Usage(String),
    /// A numerical routine failed. Exit status 1.
    #[error("{0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<couette_core::Error> for CliError {
    fn from(e: couette_core::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    /// False when a tolerance or threshold check failed.
    pub passed: bool,
    /// Extra files to write, `(path, contents)`.
    pub extra_files: Vec<(std::path::PathBuf, String)>,
}

impl Outcome {
    pub fn ok(text: String) -> Self {
        Self { text, passed: true, extra_files: Vec::new() }
    }
}

/// Policy for the core loops given the configured worker count.
pub fn execution_for(jobs: Option<usize>) -> Execution {
    match jobs {
        Some(1) => Execution::Sequential,
        _ => Execution::Parallel,
    }
}
