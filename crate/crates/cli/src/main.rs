use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;

use pseudoext_core::boltzmann::{enumerate_exact, generate_relaxation};
use pseudoext_core::checks::invariant_suite;
use pseudoext_core::harness::{run_and_write, ExperimentConfig};

#[derive(Parser)]
#[command(name = "pseudoext", version, about = "Pseudo-extended MCMC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print exact reference quantities.
    Oracle {
        #[command(subcommand)]
        oracle: Oracle,
    },
    /// Run the numerical invariant suite.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Exact moments of a Boltzmann machine relaxation by enumeration.
    Boltzmann {
        #[arg(long = "d-b", default_value_t = 10)]
        d_b: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda2: f64,
        /// Also write the relaxation instance as JSON.
        #[arg(long)]
        save: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::from_path(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let Some(dir) = out.or_else(|| cfg.output_dir.clone()) else {
                bail!("no output directory: pass --out or set output_dir");
            };
            let runs = run_and_write(&cfg, &dir)?;
            for run in &runs {
                let r = &run.report;
                info!("{} N={} finished in {:.1}s", r.method, r.n_pseudo, run.timing.mean_seconds);
                println!(
                    "{} on {} (N = {}): mean {:?}, second moment {:?}",
                    r.method, r.target, r.n_pseudo, r.aggregate.mean, r.aggregate.second_moment
                );
            }
            println!("wrote {}", dir.display());
            Ok(true)
        }
        Command::Oracle { oracle: Oracle::Boltzmann { d_b, seed, lambda1, lambda2, save } } => {
            let relax = generate_relaxation(seed, d_b, lambda1, lambda2)?;
            if let Some(path) = save {
                std::fs::write(&path, relax.to_json()?)?;
            }
            let exact = enumerate_exact(&relax)?;
            println!("{}", serde_json::to_string_pretty(&exact)?);
            Ok(true)
        }
        Command::Check { seed } => {
            let outcomes = invariant_suite(seed);
            for outcome in &outcomes {
                println!("{outcome}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} checks, {failed} failed", outcomes.len());
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
