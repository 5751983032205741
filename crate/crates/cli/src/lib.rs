//! Command-line front end of the entromodem toolkit.
//!
//! Commands write RFC-4180 CSV files and append one JSON line per run to
//! `manifest.jsonl` in the output directory.

mod args;
mod commands;
mod config;
mod error;
pub mod frame;
mod output;

use std::ffi::OsString;

use clap::{CommandFactory, FromArgMatches, Parser};

use args::Cli;
use error::CliError;

/// Parses twice: the first pass finds `--config` and which flags were
/// given; the second sees the config entries appended as flags.
fn parse(argv: Vec<OsString>) -> Result<Cli, u8> {
    let clap_err = |e: clap::Error| {
        let _ = e.print();
        e.exit_code() as u8
    };
    let cmd = Cli::command();
    let matches = cmd.clone().try_get_matches_from(&argv).map_err(clap_err)?;
    let Some((sub_name, sub_matches)) = matches.subcommand() else {
        return Cli::from_arg_matches(&matches).map_err(clap_err);
    };
    let Some(path) = sub_matches.get_one::<std::path::PathBuf>("config") else {
        return Cli::from_arg_matches(&matches).map_err(clap_err);
    };
    let sub = cmd
        .find_subcommand(sub_name)
        .expect("parsed subcommand exists");
    let merged = config::read_config(path)
        .and_then(|c| config::merge_into_args(argv.clone(), &c, sub, sub_matches))
        .map_err(report)?;
    Cli::try_parse_from(merged).map_err(clap_err)
}

fn report(e: CliError) -> u8 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Runs one command line (program name first) and returns the exit code:
/// 0 success, 2 usage, 3 runtime failure, 4 failed `--check`.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match parse(argv.into_iter().map(Into::into).collect()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match commands::dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => report(e),
    }
}
