use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use stratmc::{problem_by_id, ProblemSpec};

use crate::config::ExperimentConfig;
use crate::reference::Reference;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub rep: u64,
    pub seed: u64,
    pub estimate: f64,
    pub v_hat: f64,
    pub n_strata: usize,
    pub evals: u64,
    pub alpha_final: f64,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub problem: String,
    pub geometry: String,
    pub alpha_mode: String,
    pub c: u64,
    pub n_max: u64,
    pub reps: u64,
    pub mean_estimate: f64,
    /// Sample variance of the estimates across repetitions.
    pub var_estimator: Option<f64>,
    pub ref_var_q: f64,
    /// `(Var(Q) / N_max) / var_estimator`.
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

/// One adaptive run of `problem` per repetition with seed `base + rep`.
/// Repetitions run in parallel and are reported in order.
pub fn run_experiment(cfg: &ExperimentConfig, problem: &ProblemSpec, reference: &Reference) -> Result<ExperimentResult> {
    cfg.validate(problem.dim)?;
    let rows: Vec<ResultRow> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = cfg.seed.wrapping_add(rep);
            let model = problem.model::<f64>();
            let start = Instant::now();
            let report = stratmc::run(cfg.driver_config(seed), &model)
                .with_context(|| format!("{} rep {rep} (seed {seed})", problem.id))?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            Ok(ResultRow {
                rep,
                seed,
                estimate: report.estimate,
                v_hat: report.v_hat,
                n_strata: report.n_strata,
                evals: report.evaluations,
                alpha_final: report.final_alpha(),
                wall_ms: cfg.timing.then_some(wall),
            })
        })
        .collect::<Result<_>>()?;
    let summary = summarize(cfg, &rows, reference);
    Ok(ExperimentResult { rows, summary })
}

pub fn summarize(cfg: &ExperimentConfig, rows: &[ResultRow], reference: &Reference) -> Summary {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.estimate).sum::<f64>() / n;
    let var = (rows.len() > 1).then(|| rows.iter().map(|r| (r.estimate - mean).powi(2)).sum::<f64>() / (n - 1.0));
    let speedup = var.map(|v| reference.var / cfg.n_max as f64 / v);
    Summary {
        problem: cfg.problem.clone(),
        geometry: cfg.geometry.to_string(),
        alpha_mode: cfg.alpha_label(),
        c: cfg.c,
        n_max: cfg.n_max,
        reps: cfg.reps,
        mean_estimate: mean,
        var_estimator: var,
        ref_var_q: reference.var,
        speedup,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const ROW_HEADER: [&str; 8] = ["rep", "seed", "estimate", "v_hat", "n_strata", "evals", "alpha_final", "wall_ms"];
pub const SUMMARY_HEADER: [&str; 10] = [
    "problem",
    "geometry",
    "alpha_mode",
    "c",
    "n_max",
    "reps",
    "mean_estimate",
    "var_estimator",
    "ref_var_q",
    "speedup",
];

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROW_HEADER)?;
    for r in rows {
        w.write_record([
            r.rep.to_string(),
            r.seed.to_string(),
            r.estimate.to_string(),
            r.v_hat.to_string(),
            r.n_strata.to_string(),
            r.evals.to_string(),
            r.alpha_final.to_string(),
            opt(r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summaries<W: Write>(out: W, summaries: &[Summary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        w.write_record([
            s.problem.clone(),
            s.geometry.clone(),
            s.alpha_mode.clone(),
            s.c.to_string(),
            s.n_max.to_string(),
            s.reps.to_string(),
            s.mean_estimate.to_string(),
            opt(s.var_estimator),
            s.ref_var_q.to_string(),
            opt(s.speedup),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<std::fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))
}

/// `results.csv` becomes `results_summary.csv`.
pub fn summary_path(rows_path: &Path) -> PathBuf {
    let stem = rows_path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    rows_path.with_file_name(format!("{stem}_summary.csv"))
}

pub fn write_experiment(path: &Path, result: &ExperimentResult) -> Result<()> {
    write_rows(create(path)?, &result.rows)?;
    write_summaries(create(&summary_path(path))?, std::slice::from_ref(&result.summary))
}

/// Axes of a sweep; every combination becomes one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub base: ExperimentConfig,
    pub problems: Vec<String>,
    pub geometries: Vec<crate::config::GeometryArg>,
    pub alphas: Vec<crate::config::AlphaArg>,
    pub cs: Vec<u64>,
    pub n_maxes: Vec<u64>,
}

impl SweepGrid {
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut cells = Vec::new();
        for problem in &self.problems {
            for &geometry in &self.geometries {
                for &alpha in &self.alphas {
                    for &c in &self.cs {
                        for &n_max in &self.n_maxes {
                            let mut cfg = self.base.clone();
                            cfg.problem = problem.clone();
                            cfg.geometry = geometry;
                            cfg.alpha = alpha;
                            cfg.c = c;
                            cfg.n_max = n_max;
                            cells.push(cfg);
                        }
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub summaries: Vec<Summary>,
    pub failures: Vec<(String, anyhow::Error)>,
}

/// Runs every cell into `dir/<cell>.csv` and writes `dir/summary.csv`.
/// A failing cell is reported and skipped; the rest still run.
pub fn run_sweep(grid: &SweepGrid, dir: &Path, cache_dir: &Path) -> Result<SweepOutcome> {
    let cells = grid.cells();
    if cells.is_empty() {
        bail!("sweep grid is empty");
    }
    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    for cfg in cells {
        let name = cfg.cell_name();
        let result = (|| {
            let problem = problem_by_id(&cfg.problem)?;
            let reference = crate::reference::reference(&problem, cache_dir)?;
            let result = run_experiment(&cfg, &problem, &reference)?;
            write_rows(create(&dir.join(format!("{name}.csv")))?, &result.rows)?;
            Ok::<_, anyhow::Error>(result.summary)
        })();
        match result {
            Ok(s) => summaries.push(s),
            Err(e) => failures.push((name, e)),
        }
    }
    write_summaries(create(&dir.join("summary.csv"))?, &summaries)?;
    Ok(SweepOutcome { summaries, failures })
}
