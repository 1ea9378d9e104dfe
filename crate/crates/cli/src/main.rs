//! `sqg` — experiment runner for the SQG workbench.

mod commands;
mod config;
mod report;
mod snapshot;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sqg",
    about = "Dissipative surface quasi-geostrophic simulation and maximum-principle verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML config; writes snapshots and a
    /// diagnostics CSV. Exit code 2 signals a blow-up abort.
    Simulate { config: PathBuf },

    /// Scan the master inequality margin over a log grid of separations.
    /// Exit code 0 iff the margin is certified negative everywhere.
    VerifyInequality {
        #[arg(long = "a", alias = "A")]
        a_const: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        xi_min: Option<f64>,
        #[arg(long)]
        xi_max: Option<f64>,
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long, default_value = "margins.csv")]
        out: PathBuf,
    },

    /// Search for admissible (delta, gamma) with certified-negative margin.
    ScanParams {
        #[arg(long = "a", alias = "A")]
        a_const: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Measure the empirical modulus of continuity of a snapshot.
    EmpiricalModulus {
        snapshot: PathBuf,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        cutoff: f64,
        #[arg(long, default_value = "empirical_modulus.csv")]
        out: PathBuf,
    },

    /// Estimate the velocity-modulus constant A on a single-mode corpus.
    #[command(alias = "calibrate-A")]
    CalibrateA { config: PathBuf },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("SQG_THREADS") {
        match value.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid SQG_THREADS={value:?}"),
        }
    }
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config } => commands::simulate(&config),
        Command::VerifyInequality {
            a_const,
            delta,
            gamma,
            xi_min,
            xi_max,
            points,
            out,
        } => commands::verify_inequality(a_const, delta, gamma, xi_min, xi_max, points, &out),
        Command::ScanParams { a_const, out } => commands::scan_params(a_const, out.as_deref()),
        Command::EmpiricalModulus {
            snapshot,
            cutoff,
            out,
        } => commands::empirical_modulus_cmd(&snapshot, cutoff, &out),
        Command::CalibrateA { config } => commands::calibrate_a_cmd(&config),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
