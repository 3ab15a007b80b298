mod cli;
mod commands;
mod config;
mod io;
mod report;

use anyhow::{Context, Result};
use clap::Parser;
use cli::{Cli, Command};
use std::process::ExitCode;

/// PRIVDISTILL_THREADS caps the rayon pool; unset means one worker per core.
fn init_thread_pool() -> Result<()> {
    let Ok(raw) = std::env::var("PRIVDISTILL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("PRIVDISTILL_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("rayon pool already initialized")?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::GenLabels(args) => commands::labels::run(args),
        Command::SplitFeatures(args) => commands::split::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Sweep(args) => commands::sweep::run(args),
        Command::Theory(args) => commands::theory::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Fixture(args) => commands::fixture::run(args),
    }
}

fn main() -> ExitCode {
    if let Err(err) = init_thread_pool() {
        eprintln!("error: {err:#}");
        return ExitCode::FAILURE;
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
