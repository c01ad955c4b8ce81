//! Flat `key = value` config files. Keys are long flag names without the
//! leading dashes; values are taken verbatim, `true`/`false` toggle switches.
//! A key only applies when the flag was not given on the command line.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

use crate::exit::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected `key = value`", i + 1))
        })?;
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        if matches!(key.as_str(), "config" | "help" | "version") {
            return Err(CliError::Usage(format!(
                "config line {}: `{key}` cannot be set from a config file",
                i + 1
            )));
        }
        out.push(Entry {
            line: i + 1,
            key,
            value: v.trim().trim_matches('"').to_string(),
        });
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<Entry>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

/// Extra arguments that supply config values for flags absent from `argv`.
/// Keys unknown to every subcommand are rejected; keys belonging to another
/// subcommand are ignored so one file can serve several commands.
pub fn merge_args(
    cmd: &Command,
    matches: &ArgMatches,
    entries: &[Entry],
) -> Result<Vec<OsString>, CliError> {
    let Some((sub_name, sub_matches)) = matches.subcommand() else {
        return Ok(Vec::new());
    };
    let sub = cmd
        .find_subcommand(sub_name)
        .expect("parsed subcommand exists");
    let mut extra = Vec::new();
    for e in entries {
        let Some(arg) = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(e.key.as_str()))
        else {
            let known = cmd.get_subcommands().any(|s| {
                s.get_arguments()
                    .any(|a| a.get_long() == Some(e.key.as_str()))
            });
            if known {
                continue;
            }
            return Err(CliError::Usage(format!(
                "config line {}: unknown key `{}`",
                e.line, e.key
            )));
        };
        let id = arg.get_id().as_str();
        // globals are propagated into the subcommand's matches
        if sub_matches.value_source(id) == Some(ValueSource::CommandLine) {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(OsString::from(format!("--{}={}", e.key, e.value)));
        } else {
            match e.value.as_str() {
                "true" => extra.push(OsString::from(format!("--{}", e.key))),
                "false" => {}
                v => {
                    return Err(CliError::Usage(format!(
                        "config line {}: `{}` expects true or false, got `{v}`",
                        e.line, e.key
                    )))
                }
            }
        }
    }
    Ok(extra)
}
