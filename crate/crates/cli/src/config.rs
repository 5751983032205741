//! Config-file handling. A config file holds `key = value` lines whose keys
//! are the command's flag names; values fill any flag not given on the
//! command line, so the order of precedence is defaults < file < flags.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command as ClapCommand};

use crate::error::{CliError, CliResult};

pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key = value",
                i + 1
            )));
        };
        let key = k.trim().to_string();
        let value = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        if out.insert(key.clone(), value).is_some() {
            return Err(CliError::Usage(format!(
                "config line {}: duplicate key `{key}`",
                i + 1
            )));
        }
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Usage(format!(
            "config key `{key}`: `{v}` is not a boolean"
        ))),
    }
}

/// Appends `--key value` for each config entry the command line did not
/// set. `sub` is the subcommand definition, `matches` its first-pass parse.
pub fn merge_into_args(
    mut argv: Vec<OsString>,
    config: &BTreeMap<String, String>,
    sub: &ClapCommand,
    matches: &ArgMatches,
) -> CliResult<Vec<OsString>> {
    for (key, value) in config {
        if key == "config" {
            return Err(CliError::Usage(
                "a config file cannot name another config file".into(),
            ));
        }
        let Some(arg) = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            return Err(CliError::Usage(format!(
                "config key `{key}` is not a flag of `{}`",
                sub.get_name()
            )));
        };
        if matches.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            if parse_bool(key, value)? {
                argv.push(format!("--{key}").into());
            }
        } else {
            argv.push(format!("--{key}={value}").into());
        }
    }
    Ok(argv)
}
