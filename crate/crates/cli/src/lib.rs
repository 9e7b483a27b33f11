//! Command-line harness: subcommands, `--config` files, CSV/SVG outputs and
//! run manifests that can be replayed bit for bit.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on runtime
//! failures.

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod plot;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<multisense_core::Error> for CliError {
    fn from(e: multisense_core::Error) -> Self {
        match e {
            multisense_core::Error::Io(io) => CliError::Io(io),
            multisense_core::Error::Format(msg) => CliError::Runtime(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match config::expand_config(&argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match commands::execute(&cli.command, &argv[1..]) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
