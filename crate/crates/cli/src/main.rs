//! `sgbpe`: train, apply and evaluate significance-gain and frequency BPE tokenizers.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O or malformed input, 4 invalid
//! configuration, 5 internal error. Errors are printed to stderr as a single
//! line `sgbpe: error[<kind>]: <message>`.

mod args;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;

use args::{Cli, Command};
use config::FileConfig;
use error::CliError;

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => LevelFilter::Warn,
        (false, 0) => LevelFilter::Info,
        (false, 1) => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_env("SGBPE_LOG")
        .init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Train(a) => commands::train(a, &file),
        Command::Encode(a) => commands::encode(a, &file),
        Command::Decode(a) => commands::decode(a),
        Command::Eval(a) => commands::eval(a, &file),
        Command::Sweep(a) => commands::sweep(a, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.exit_code() == 0 => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let err = CliError::Usage(first.trim_start_matches("error: ").to_owned());
            eprintln!("{}", err.line());
            return ExitCode::from(err.exit_code());
        }
    };
    init_logging(cli.verbose, cli.quiet);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.line());
            ExitCode::from(err.exit_code())
        }
    }
}
