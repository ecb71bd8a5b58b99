//! Experiment front end for `qwalk-core`: configuration, result tables and
//! the validation suite.

pub mod args;
pub mod commands;
pub mod table;
pub mod validate;

use std::io::Write;

use qwalk_core::QwalkError;
use thiserror::Error;

use crate::args::{Command, Format, OutputArgs};
use crate::table::ResultTable;

pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(QwalkError),
    #[error("{0}")]
    Runtime(String),
    #[error("output: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

pub struct Outcome {
    pub table: ResultTable,
    /// False only when `validate` found a failing check.
    pub passed: bool,
}

pub fn run(cmd: &Command) -> Result<Outcome, CliError> {
    let ok = |table| {
        Ok(Outcome {
            table,
            passed: true,
        })
    };
    match cmd {
        Command::Evolve(a) => ok(commands::cmd_evolve(a)?),
        Command::Timeavg(a) => ok(commands::cmd_timeavg(a)?),
        Command::Stationary(a) => ok(commands::cmd_stationary(a)?),
        Command::Spectrum(a) => ok(commands::cmd_spectrum(a)?),
        Command::Topology(a) => ok(commands::cmd_topology(a)?),
        Command::Perturb(a) => ok(commands::cmd_perturb(a)?),
        Command::Locallength(a) => ok(commands::cmd_locallength(a)?),
        Command::Validate(a) => {
            let (table, passed) = validate::cmd_validate(a)?;
            Ok(Outcome { table, passed })
        }
    }
}

pub fn render(table: &ResultTable, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

pub fn write_output(table: &ResultTable, out: &OutputArgs) -> Result<(), CliError> {
    let text = render(table, out.format)?;
    match &out.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Sizes the global rayon pool from `QWALK_THREADS`, when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QWALK_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Config(format!("QWALK_THREADS={v:?} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}
