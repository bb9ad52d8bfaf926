//! `sdde` — simulate stochastic delay differential equations with the
//! backward Euler scheme, certify mean-square stability/contractivity, and
//! verify the bound envelopes by coupled Monte Carlo.

mod config;
mod registry;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sdde",
    about = "Backward Euler simulation and mean-square stability certificates for SDDEs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override mc.seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for path-parallel runs; never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override output.dir from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the stability certificate for the configured problem.
    Certify { config: PathBuf },
    /// Simulate one trajectory (path index 0) and write it as CSV.
    Simulate { config: PathBuf },
    /// Estimate E|X_n - Y_n|^2 over coupled paths and check the envelope.
    /// Exit status 0 iff there are no violations.
    Deviation { config: PathBuf },
    /// Measure the strong convergence order on the delay-free linear family.
    Order { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config_path = match &cli.command {
        Command::Certify { config }
        | Command::Simulate { config }
        | Command::Deviation { config }
        | Command::Order { config } => config.clone(),
    };

    let mut cfg = match config::load_config(&config_path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error:\n{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }

    let work = || -> sdde::Result<usize> {
        match &cli.command {
            Command::Certify { .. } => runner::run_certify(&cfg).map(|()| 0),
            Command::Simulate { .. } => runner::run_simulate(&cfg).map(|()| 0),
            Command::Deviation { .. } => runner::run_deviation(&cfg),
            Command::Order { .. } => runner::run_order(&cfg).map(|()| 0),
        }
    };

    let outcome = match cli.threads {
        Some(n) if n > 0 => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool,
                Err(e) => {
                    eprintln!("cannot build thread pool: {e}");
                    return ExitCode::from(2);
                }
            };
            pool.install(work)
        }
        _ => work(),
    };

    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(violations) => {
            eprintln!("{violations} envelope violation(s)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
