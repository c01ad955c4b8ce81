use std::path::PathBuf;
use std::process::ExitCode;

use phasebound::Error;
use thiserror::Error;

pub const VERIFY_FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const DEGENERATE: u8 = 3;
pub const IO: u8 = 4;
pub const TRUNCATION: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Clap(#[from] clap::Error),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Clap(_) => USAGE,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::NotConstructible(_) => USAGE,
                Error::DegenerateDenominator(_) | Error::FlatSurface | Error::Numerical(_) => {
                    DEGENERATE
                }
                Error::TruncationBudget { .. } => TRUNCATION,
            },
            CliError::Io { .. } => IO,
            CliError::VerifyFailed(_) => VERIFY_FAILED,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}
