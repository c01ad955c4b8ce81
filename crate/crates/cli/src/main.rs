//! `phasebound` command-line front end.

mod args;
mod commands;
mod config;
mod exit;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches, Parser};

use args::{Cli, Command, OracleArgs};
use exit::CliError;

fn parse(argv: Vec<OsString>) -> Result<Cli, CliError> {
    let mut cmd = Cli::command();
    cmd.build();
    let matches = cmd.clone().try_get_matches_from(&argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let Some(path) = &cli.config else {
        return Ok(cli);
    };
    let extra = config::merge_args(&cmd, &matches, &config::load(path)?)?;
    if extra.is_empty() {
        return Ok(cli);
    }
    log::debug!("config adds {extra:?}");
    Ok(Cli::try_parse_from(argv.into_iter().chain(extra))?)
}

/// Parses the flags of one golden oracle case.
pub(crate) fn parse_case(flags: &[&str]) -> Result<OracleArgs, CliError> {
    let argv = ["phasebound", "oracle"].iter().chain(flags.iter());
    match Cli::try_parse_from(argv).map(|c| c.command) {
        Ok(Command::Oracle(a)) => Ok(a),
        Ok(_) => unreachable!("golden cases are oracle invocations"),
        Err(e) => Err(e.into()),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Bound(a) => commands::bound(cli, a),
        Command::Sweep(a) => commands::sweep(cli, a),
        Command::Verify(a) => commands::verify(cli, a),
        Command::Oracle(a) => commands::oracle(cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match parse(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::USAGE),
            };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &[&str]) -> Vec<OsString> {
        std::iter::once("phasebound")
            .chain(s.iter().copied())
            .map(OsString::from)
            .collect()
    }

    #[test]
    fn config_fills_missing_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "eta = 0.5\nnbar-b = 1\nprobe = custom\nmean = 1\nvar = 1\ndraws = 7\nseed = 9\n",
        )
        .unwrap();
        let cli = parse(argv(&[
            "bound",
            "--config",
            path.to_str().unwrap(),
            "--eta",
            "0.25",
        ]))
        .unwrap();
        let Command::Bound(b) = &cli.command else {
            panic!("bound")
        };
        assert_eq!(b.channel.eta, Some(0.25));
        assert_eq!(b.channel.nbar_b, Some(1.0));
        assert_eq!(b.probe.var, Some(1.0));
        assert_eq!(cli.seed, 9);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "colour = blue\n").unwrap();
        assert!(parse(argv(&["bound", "--config", path.to_str().unwrap()])).is_err());
    }

    #[test]
    fn golden_cases_parse() {
        for (_, flags) in commands::ORACLE_CASES {
            let a = parse_case(flags).unwrap();
            assert!(a.probe.spec().unwrap().is_some());
        }
    }
}
