use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lmax_cli::{run, Cli, CliError};

/// Worker threads for replicated runs; everything that affects results is a
/// flag.
const WORKERS_ENV: &str = "LMAX_WORKERS";

fn configure_workers() -> Result<(), CliError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = value
        .parse()
        .map_err(|_| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Usage(e.render().to_string())),
    };
    if let Err(e) = configure_workers() {
        return fail(e);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
