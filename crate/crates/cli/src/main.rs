mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;
use rpe::RpeError;
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration or input files (exit status 2).
    #[error("{0}")]
    Usage(String),
    /// Failure while computing (exit status 1).
    #[error("{0}")]
    Runtime(String),
}

impl From<RpeError> for CliError {
    fn from(e: RpeError) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        (false, 2) => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code == 0 {
                return Ok(());
            }
            return Err(CliError::Usage(String::new()));
        }
    };
    init_logging(cli.global.verbose, cli.global.quiet);
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("cannot start worker threads: {e}")))?;
    let ctx = commands::Run {
        global: &cli.global,
        argv: argv
            .iter()
            .map(|a| a.to_string_lossy().into_owned())
            .collect(),
        threads: rayon::current_num_threads(),
    };
    match &cli.command {
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::EstimateDim(a) => commands::estimate_dim(&ctx, a),
        Command::Double(a) => commands::double(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Benchmark(a) => commands::benchmark(&ctx, a),
    }
}

fn main() -> ExitCode {
    let result = config::expand_args(std::env::args_os().collect()).and_then(run);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
