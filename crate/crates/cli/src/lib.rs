//! Command-line harness: config parsing, dispatch and CSV output.

pub mod commands;
pub mod config;

use std::io::Write;

pub use commands::{dispatch, read_weights};
pub use config::{Command, ConfigError, Params, RunConfig, CONFIG_LINE};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Runtime(_) => 1,
        }
    }
}

/// The `#` header block that opens every output.
pub fn header(config: &RunConfig) -> String {
    format!("# pegasus {VERSION}\n# seed={}\n{CONFIG_LINE}{}\n", config.seed, config.to_json())
}

/// Runs `config` and writes header plus body to its output path, or to `stdout`.
pub fn run_to(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), RunError> {
    let body = dispatch(config)?;
    let text = header(config) + &body;
    match &config.output_path {
        Some(path) => std::fs::write(path, text).map_err(|e| RunError::Runtime(format!("cannot write {path}: {e}"))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| RunError::Runtime(format!("cannot write output: {e}"))),
    }
}
