//! Thin CLI over the library: parses flags, caps the thread pool from
//! `DISCOUNT_TS_THREADS`, and dispatches to `cli::run`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use discount_ts::cli::{self, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "discount-ts",
    about = "Discount term-structure engine: curves, simulation, validation",
    version
)]
struct CliArgs {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Tabulate h/discount/bond/forward/short-rate curves to CSV.
    Curve(Common),
    /// Simulate factor, toy-rate or curve-grid paths.
    Simulate(Common),
    /// Run the Monte Carlo validation battery.
    Validate(Common),
    /// Tabulate the deterministic curve flow.
    Spde(Common),
}

#[derive(Args)]
struct Common {
    /// JSON model configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sample paths (overrides the config).
    #[arg(long)]
    paths: Option<usize>,
    /// Time step in years (overrides the config).
    #[arg(long)]
    dt: Option<f64>,
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var(cli::THREADS_ENV_VAR) {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                // A second initialization attempt would error; ignore it.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let args = CliArgs::parse();
    let (command, common) = match &args.command {
        Sub::Curve(c) => (Command::Curve, c),
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Validate(c) => (Command::Validate, c),
        Sub::Spde(c) => (Command::Spde, c),
    };
    let overrides = Overrides {
        out: common.out.clone(),
        seed: common.seed,
        paths: common.paths,
        dt: common.dt,
    };
    let code = cli::run(command, &common.config, &overrides);
    ExitCode::from(code as u8)
}
