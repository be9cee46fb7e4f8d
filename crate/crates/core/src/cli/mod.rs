//! Configuration, CSV ingest and the command implementations behind the
//! `fairthresh` binary. Commands return their machine output as in-memory
//! CSV files plus a human-readable report; the binary decides where they go.

pub mod commands;
pub mod config;
pub mod ingest;

use std::path::Path;

use thiserror::Error;

pub use commands::{run_curve, run_ingest_check, run_solve, run_sweep, run_verify, CommandOutput, Format, RunOptions};
pub use config::ProblemConfig;
pub use ingest::{emit_distribution_csv, ingest_distribution_csv, Ingested, IngestedGroup};

/// Exit status of a successful command.
pub const EXIT_OK: u8 = 0;
/// A verification property failed.
pub const EXIT_VERIFY_FAILED: u8 = 1;
/// Malformed config, data or arguments, or IO failure.
pub const EXIT_CONFIG: u8 = 2;
/// Well-formed input that violates a solver or analysis precondition.
pub const EXIT_PRECONDITION: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_precondition() => EXIT_PRECONDITION,
            _ => EXIT_CONFIG,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// 17 significant digits, so every f64 round-trips.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Writes every output file into `dir`, creating it.
pub fn write_outputs(dir: &Path, out: &CommandOutput) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (name, body) in &out.files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 0.0] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::Core(crate::Error::Precondition("x".into())).exit_code(), EXIT_PRECONDITION);
        assert_eq!(CliError::Core(crate::Error::InvalidInput("x".into())).exit_code(), EXIT_CONFIG);
    }
}
