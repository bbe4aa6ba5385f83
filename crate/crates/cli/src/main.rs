//! `poissonbc`: capacity regions, information-density checks and coding
//! experiments for the two-receiver Poisson channel.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CapacityArgs, ChannelArgs, CodesimArgs, OutputFormat, VerifyArgs, VerifyKind};

/// Bad parameters or configuration; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// A verification ran to completion and failed; exits with status 3.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

#[derive(Parser, Debug)]
#[command(name = "poissonbc", version, about)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "POISSONBC_OUT", default_value = "poissonbc-out")]
    pub out: PathBuf,
    /// JSON file overriding the flags; a manifest from an earlier run works.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report rates in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// What goes to stdout.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ordering verdicts (more capable, degraded) in both directions.
    Classify(ChannelArgs),
    /// Capacities and capacity regions.
    #[command(subcommand)]
    Capacity(CapacityCommand),
    /// Monte Carlo checks of the information-density relations.
    Verify {
        #[arg(value_enum)]
        kind: VerifyKind,
        #[command(flatten)]
        args: VerifyArgs,
    },
    /// Threshold-decoding experiment swept over block counts.
    Codesim(CodesimArgs),
}

#[derive(Subcommand, Debug)]
pub enum CapacityCommand {
    /// Point-to-point capacity of each receiver.
    Pp(ChannelArgs),
    /// Secrecy capacity for y against eavesdropper z.
    Wiretap(ChannelArgs),
    /// Broadcast region with private messages.
    Bc(CapacityArgs),
    /// Degraded-message-sets region.
    Dms(CapacityArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerificationFailed>().is_some() {
        return 3;
    }
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<poissonbc_core::Error>() {
        Some(
            poissonbc_core::Error::InvalidParams(_)
            | poissonbc_core::Error::InvalidModel(_)
            | poissonbc_core::Error::Domain(_)
            | poissonbc_core::Error::Config(_)
            | poissonbc_core::Error::CodebookTooLarge { .. },
        ) => 2,
        _ => 1,
    }
}
