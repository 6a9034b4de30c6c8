//! `plugbias`: bias-corrected estimates, simulation experiments, simulation
//! planning and exact oracle checks from the command line.

mod commands;
mod config;

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Flags;

#[derive(Debug, Parser)]
#[command(
    name = "plugbias",
    version,
    about = "Analytic bias correction for plug-in estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plug-in and corrected estimates from a data file.
    Estimate {
        #[command(flatten)]
        flags: Flags,
        /// Whitespace- or comma-separated values, one observation per line.
        data: PathBuf,
    },
    /// Monte Carlo relative bias of corrected estimates.
    Simulate {
        #[command(flatten)]
        flags: Flags,
    },
    /// Number of simulations needed to resolve the bias.
    Plan {
        #[command(flatten)]
        flags: Flags,
    },
    /// Exact bias under a small discrete law.
    Oracle {
        #[command(flatten)]
        flags: Flags,
    },
}

/// Exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config = 2,
    Data = 3,
    Numeric = 4,
}

#[derive(Debug)]
pub struct CliError {
    kind: Kind,
    message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Config,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Data,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Numeric,
            message: message.into(),
        }
    }

    pub fn io(e: io::Error) -> Self {
        Self::config(format!("output: {e}"))
    }

    pub fn csv(e: csv::Error) -> Self {
        Self::config(format!("csv: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<plugbias::Error> for CliError {
    fn from(e: plugbias::Error) -> Self {
        let kind = match e {
            plugbias::Error::InvalidSample(_) => Kind::Data,
            plugbias::Error::Degenerate(_) => Kind::Numeric,
            plugbias::Error::InvalidArgument(_) | plugbias::Error::Unavailable(_) | plugbias::Error::Budget(_) => {
                Kind::Config
            }
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Estimate { flags, data } => commands::estimate(&flags.resolve()?, &data, &mut out),
        Command::Simulate { flags } => commands::simulate(&flags.resolve()?, &mut out),
        Command::Plan { flags } => commands::plan(&flags.resolve()?, &mut out, &mut io::stderr()),
        Command::Oracle { flags } => commands::oracle(&flags.resolve()?, &mut out),
    }?;
    out.flush().map_err(CliError::io)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("plugbias: {e}");
            ExitCode::from(e.kind as u8)
        }
    }
}
