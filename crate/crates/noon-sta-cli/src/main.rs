//! Command line front end. Each subcommand reads one self-describing JSON
//! config and writes deterministic CSV or JSON, so runs can be diffed and
//! archived. Failures exit nonzero with a machine-readable JSON error on
//! stderr: 2 config, 3 engine, 4 file io.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod config;
mod error;
mod run;

#[derive(Parser)]
#[command(
    name = "noon-sta",
    version,
    about = "Pulse synthesis and simulation for deterministic NOON-state preparation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Integrate one stage and report final populations as JSON on stdout.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Also write sampled populations over time to this CSV file.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Run a full NOON(n) protocol and write the result JSON.
    Noon {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scan the pulse-parameter landscape and write one CSV row per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 1 forces the sequential path.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Emit the realizable two-tone frame for a stage's pulse pair as CSV.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample one named pulse shape to CSV: t, value, derivative.
    PulseDump {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map two-transmon device parameters to the effective qutrit model.
    TcqMap {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run::dispatch(cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
