use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use stratmc::problem_by_id;
use stratmc_cli::experiment::{summary_path, write_experiment, write_rows, write_summaries};
use stratmc_cli::{reference, run_experiment, run_sweep, AlphaArg, ExperimentConfig, GeometryArg, SweepGrid};

#[derive(Parser)]
#[command(name = "stratmc", version, about = "Adaptive stratified Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated runs of one configuration.
    Run {
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        geometry: Option<GeometryArg>,
        /// A number in [0, 0.95] or `dynamic`.
        #[arg(long)]
        alpha: Option<AlphaArg>,
        #[arg(long)]
        c: Option<u64>,
        #[arg(long)]
        n_max: Option<u64>,
        /// Per-repetition CSV; the summary goes next to it as `<stem>_summary.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Every combination of the listed values; one CSV per cell plus `summary.csv`.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        problem: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "hyperrect")]
        geometry: Vec<GeometryArg>,
        #[arg(long, value_delimiter = ',', default_value = "0.9")]
        alpha: Vec<AlphaArg>,
        #[arg(long, value_delimiter = ',', default_value = "10")]
        c: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "10000")]
        n_max: Vec<u64>,
        /// Output directory.
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// List the available problem ids.
    Problems,
}

#[derive(Args)]
struct Common {
    /// `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    min_samples: Option<u64>,
    #[arg(long)]
    reserve_one: Option<bool>,
    /// Trim each iteration to `c * strata` samples instead of letting
    /// oversampled plans run up to the budget.
    #[arg(long)]
    truncate_batch: bool,
    /// Fill the wall_ms column (makes output timing dependent).
    #[arg(long)]
    timing: bool,
    /// Where reference Var(Q) sidecar files live; defaults to the output directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl Common {
    fn base(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.alpha_max {
            cfg.alpha_max = v;
        }
        if let Some(v) = self.reps {
            cfg.reps = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.min_samples.is_some() {
            cfg.min_samples = self.min_samples;
        }
        if self.reserve_one.is_some() {
            cfg.reserve_one = self.reserve_one;
        }
        cfg.truncate_batch |= self.truncate_batch;
        cfg.timing |= self.timing;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { problem, geometry, alpha, c, n_max, out, common } => {
            let mut cfg = common.base()?;
            if let Some(v) = problem {
                cfg.problem = v;
            }
            if let Some(v) = geometry {
                cfg.geometry = v;
            }
            if let Some(v) = alpha {
                cfg.alpha = v;
            }
            if let Some(v) = c {
                cfg.c = v;
            }
            if let Some(v) = n_max {
                cfg.n_max = v;
            }
            if out.is_some() {
                cfg.out = out;
            }
            let spec = problem_by_id(&cfg.problem)?;
            let cache = common
                .cache_dir
                .clone()
                .or_else(|| cfg.out.as_ref().and_then(|p| p.parent()).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let reference = reference(&spec, &cache)?;
            let result = run_experiment(&cfg, &spec, &reference)?;
            match &cfg.out {
                Some(path) => {
                    write_experiment(path, &result)?;
                    eprintln!("wrote {} and {}", path.display(), summary_path(path).display());
                }
                None => write_rows(std::io::stdout().lock(), &result.rows).context("writing rows")?,
            }
            write_summaries(std::io::stderr().lock(), std::slice::from_ref(&result.summary))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { problem, geometry, alpha, c, n_max, out, common } => {
            let grid =
                SweepGrid { base: common.base()?, problems: problem, geometries: geometry, alphas: alpha, cs: c, n_maxes: n_max };
            let cache = common.cache_dir.clone().unwrap_or_else(|| out.clone());
            let outcome = run_sweep(&grid, &out, &cache)?;
            for (cell, err) in &outcome.failures {
                eprintln!("cell {cell} failed: {err:#}");
            }
            eprintln!("{} cells written to {}", outcome.summaries.len(), out.display());
            Ok(if outcome.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Problems => {
            for id in stratmc::problem_ids() {
                let p = problem_by_id(&id)?;
                println!("{id}\t{}\t{}", p.dim, p.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
