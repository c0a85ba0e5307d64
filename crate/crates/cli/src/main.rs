//! Batch front-end: region searches, Fourier-Motzkin projection, coding
//! simulations, frontier comparison and oracle example regeneration.
//!
//! Exit codes: 0 success, 1 validation/usage/config errors (and a failed
//! comparison), 2 resource limits.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::Parser;
use macstate::region::RegionKind;

use commands::Target;
use config::{Command, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "macstate", version, about = "State-dependent MAC laboratory")]
struct Cli {
    /// Overrides the config's `command`.
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (or directory for derive-examples).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "MACSTATE_THREADS")]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let command = match (cli.command, cfg.command) {
        (Some(a), Some(b)) if a != b => bail!("command `{}` conflicts with config command `{}`", a.name(), b.name()),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => bail!("no command given on the command line or in the config"),
    };
    let out = Target(cli.out.or_else(|| cfg.out.as_ref().map(|p| cfg.resolve(p))));
    match command {
        Command::Region => commands::region(&cfg, RegionKind::Unconstrained, &out),
        Command::RegionConstrained => commands::region(&cfg, RegionKind::Constrained, &out),
        Command::Fme => commands::fme(&cfg, &out),
        Command::Sim => commands::sim(&cfg, &out),
        Command::Compare => commands::compare(&cfg, &out),
        Command::DeriveExamples => commands::derive_examples(&cfg, &out),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let resource = e.chain().any(|c| c.downcast_ref::<macstate::Error>().is_some_and(macstate::Error::is_resource));
    if resource {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
