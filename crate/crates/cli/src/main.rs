use std::process::ExitCode;

use clap::Parser;
use qwalk_cli::args::{Cli, Command};
use qwalk_cli::{configure_threads, run, write_output, EXIT_CONFIG, EXIT_VALIDATION};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let result = configure_threads()
        .and_then(|_| run(&cli.command))
        .and_then(|o| write_output(&o.table, cli.command.output()).map(|_| o));
    match result {
        Ok(o) => {
            if let Command::Validate(_) = cli.command {
                let failed = o
                    .table
                    .metadata
                    .summary
                    .get("failed")
                    .and_then(|c| c.as_f64())
                    .unwrap_or(0.0);
                eprintln!("validate: {} checks, {failed} failed", o.table.rows.len());
            }
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            }
        }
        Err(e) => {
            eprintln!("qwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
