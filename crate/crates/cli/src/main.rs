//! `jostspec <experiment> --config <path> [--set key=value ...] [--out <dir>] [--threads n] [--seed s]`
//!
//! Exit codes: 0 success, 2 invalid input (no files written), 3 failed
//! certificate or `compare` above tolerance (files written), 1 anything else.
//! Errors are reported as one JSON object per line on standard error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Experiment, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "jostspec", version, about = "Spectral experiments for perturbed periodic Jacobi operators")]
struct Args {
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    /// Dotted-key override, e.g. `experiment.n=40`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for grid evaluation (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Seed for random perturbations and sampled certificates.
    #[arg(long)]
    seed: Option<u64>,
}

fn metadata(cfg: &RunConfig, experiment: Experiment) -> Vec<(String, String)> {
    let x = &cfg.experiment;
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
    let interval = x.interval.map_or("admissible".to_string(), |[lo, hi]| format!("{lo};{hi}"));
    [
        ("model_hash", cfg.model_hash()),
        ("experiment", experiment.name().to_string()),
        ("seed", cfg.seed().to_string()),
        ("n", x.n.to_string()),
        ("n_list", join(&x.n_list)),
        ("interval", interval),
        ("margin", x.margin.to_string()),
        ("grid_points", x.grid_points.to_string()),
        ("quad_order", x.quad_order.to_string()),
        ("precision", format!("{:?}", x.precision).to_lowercase()),
        ("version", env!("CARGO_PKG_VERSION").to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn run(args: &Args) -> Result<i32, CliError> {
    let cfg = RunConfig::load(&args.config, &args.overrides, args.seed)?;
    let model = cfg.model()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
    let outcome = experiments::run(args.experiment, &cfg, &model)?;
    outcome.table.write(&args.out, args.experiment.name(), &metadata(&cfg, args.experiment))?;
    Ok(if outcome.passed { 0 } else { 3 })
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
