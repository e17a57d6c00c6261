use std::path::PathBuf;

use clap::{Parser, Subcommand};
use mmcert_cli::{execute, exit_code, Command, RunOptions, Status};

/// Multi-mode certification of emitter level shifts in layered resonators.
#[derive(Parser)]
#[command(name = "mmcert", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory (default: $MMCERT_OUT_DIR, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 gives a sequential reference run.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomly drawn synthetic models.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Sub {
    /// Classify each configured row and write reports, curves and pole tables.
    Classify,
    /// Tabulate the classification over mirror indices or rocking minima.
    Sweep,
    /// Write pole expansions.
    Poles,
    /// Write reflectance and level-shift spectra.
    Spectrum,
    /// Compare pole-sum, resolvent and dense-inverse forms of a mode model.
    PfmCheck,
}

fn main() {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Sub::Classify => Command::Classify,
        Sub::Sweep => Command::Sweep,
        Sub::Poles => Command::Poles,
        Sub::Spectrum => Command::Spectrum,
        Sub::PfmCheck => Command::PfmCheck,
    };
    let Some(scenario) = cli.scenario else {
        eprintln!("error: --scenario is required");
        std::process::exit(mmcert_cli::EXIT_FATAL);
    };
    let opts = RunOptions { scenario, out: cli.out, threads: cli.threads, seed: cli.seed };
    let result = execute(cmd, &opts);
    match &result {
        Ok((manifest, status)) => {
            println!("wrote {} files", manifest.len());
            if let Status::Partial(failed) = status {
                eprintln!("failed rows: {}", failed.join(", "));
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(exit_code(&result));
}
