//! `xebsim`: run random-circuit sampling and cross-entropy experiments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Knobs;

#[derive(Parser)]
#[command(name = "xebsim", version, about = "Random circuit sampling and cross-entropy benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Run {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Subcommand)]
enum Command {
    /// Statistical checks of the Haar samplers.
    HaarTest(Run),
    /// Output-probability histograms against the Porter-Thomas laws.
    PtConverge(Run),
    /// Ensemble log-ratio experiment and alpha verdict.
    XebRun(Run),
    /// Mean log-ratio against m e^(-r g) over a list of error rates.
    LogRatio(Run),
    /// Tail mass J(N) by quadrature and in closed form.
    TailTable(Run),
}

fn resolve(run: Run) -> anyhow::Result<Knobs> {
    Ok(match &run.config {
        Some(path) => run.knobs.over(Knobs::load(path)?),
        None => run.knobs,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run, cmd): (Run, fn(Knobs) -> anyhow::Result<bool>) = match cli.command {
        Command::HaarTest(r) => (r, commands::haar_test),
        Command::PtConverge(r) => (r, commands::pt_converge),
        Command::XebRun(r) => (r, commands::xeb_run),
        Command::LogRatio(r) => (r, commands::log_ratio),
        Command::TailTable(r) => (r, commands::tail_table),
    };
    match resolve(run).and_then(cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
