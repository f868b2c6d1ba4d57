//! Command-line front end: configuration, subcommands and the self-test.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selftest;

use std::io::Write;

pub use commands::execute;
pub use config::{Cli, Command, Format, RunConfig};
pub use error::{CliError, CliResult};
pub use output::Artifact;

/// Writes the artifact to the configured path, or to standard output.
pub fn emit(config: &RunConfig, artifact: &Artifact) -> CliResult<()> {
    match &config.output {
        Some(path) => std::fs::write(path, &artifact.body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(artifact.body.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Runs a configuration end to end and returns the process exit status.
pub fn run(config: &RunConfig) -> i32 {
    let outcome = execute(config).and_then(|artifact| {
        emit(config, &artifact)?;
        Ok(artifact.failure)
    });
    match outcome {
        Ok(None) => 0,
        Ok(Some(reason)) => {
            let err = CliError::Verification(reason);
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}
