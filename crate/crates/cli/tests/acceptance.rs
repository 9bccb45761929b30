//! Acceptance suite. Prints one PASS/FAIL line per criterion with the measured
//! values. Failures are reported, not panicked on, so the rest of the suite
//! still runs; set `STRATMC_ACCEPTANCE_STRICT=1` to turn any FAIL into a
//! nonzero exit status.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use stratmc::domain::unit_uniform;
use stratmc::geometry::{kuhn_decomposition, orientation_count, orientation_from_index, Geometry, HyperRectangle, SplitPlaneId};
use stratmc::problems::{FaultStress, Fixture};
use stratmc::splitting::score_split;
use stratmc::statistics::{kde_kurtosis, underestimation_bound, KdeConfig, StratumStats};
use stratmc::variance::{
    cartesian_bound_jump, cartesian_bound_smooth, hybrid_constant_lenient, v_opt_hat, v_prop_hat, variance_constant,
    variance_constant_gradient,
};
use stratmc::{problem_by_id, RandomSource};
use stratmc_cli::experiment::write_rows;
use stratmc_cli::{reference, run_experiment, AlphaArg, ExperimentConfig, ExperimentResult, GeometryArg};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cache_dir() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-reference")
}

fn experiment(problem: &str, geometry: &str, alpha: f64, c: u64) -> anyhow::Result<ExperimentResult> {
    let cfg = ExperimentConfig {
        problem: problem.into(),
        geometry: geometry.parse::<GeometryArg>()?,
        alpha: AlphaArg::Fixed(alpha),
        c,
        n_max: 10_000,
        reps: 100,
        seed: 0,
        ..ExperimentConfig::default()
    };
    let spec = problem_by_id(problem)?;
    let reference = reference(&spec, &cache_dir())?;
    run_experiment(&cfg, &spec, &reference)
}

fn speedup_of(result: &ExperimentResult) -> f64 {
    result.summary.speedup.unwrap_or(f64::NAN)
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed.as_secs_f64() <= limit_s as f64
}

fn hypersphere(n: usize, geometry: &str, check: impl Fn(f64) -> bool, limit_s: u64) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let r = experiment(&format!("hypersphere-{n}"), geometry, 0.9, 10)?;
    let elapsed = start.elapsed();
    let s = speedup_of(&r);
    Ok(outcome(check(s) && within(elapsed, limit_s), format!("speedup {s:.2}, {:.1}s", elapsed.as_secs_f64())))
}

fn fault() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let fault = FaultStress::default();
    let params = fault.params()?;
    let spec = fault.problem()?;
    let reference = reference(&spec, &cache_dir())?;
    let model = spec.model::<f64>();
    let runs: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let config = stratmc::DriverConfig::new(
                stratmc::GeometryKind::HyperRectangle,
                stratmc::AlphaMode::Fixed(0.0),
                10_000,
                seed,
            );
            let report = stratmc::run(config, &model)?;
            let mut measure = 0.0;
            for s in &report.strata {
                if let Geometry::Rect(r) = &s.geometry {
                    if fault.box_contains_discontinuity(&params, r.lower(), r.upper())? {
                        measure += s.p;
                    }
                }
            }
            Ok((report.estimate, measure))
        })
        .collect::<stratmc::Result<_>>()?;
    let elapsed = start.elapsed();
    let estimates = StratumStats::from_values(runs.iter().map(|r| r.0));
    let speedup = reference.var / 10_000.0 / estimates.variance();
    let worst = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(outcome(
        speedup >= 20.0 && worst <= 0.1 && within(elapsed, 120),
        format!(
            "speedup {speedup:.1}, largest discontinuity-strata measure {worst:.4}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    ))
}

fn sod() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let r = experiment("sod", "hyperrect", 0.9, 10)?;
    let elapsed = start.elapsed();
    let reference = reference(&problem_by_id("sod")?, &cache_dir())?;
    let covered = r.rows.iter().filter(|row| (row.estimate - reference.mean).abs() <= 4.0 * row.v_hat.sqrt()).count();
    let frac = covered as f64 / r.rows.len() as f64;
    let s = speedup_of(&r);
    Ok(outcome(
        s >= 5.0 && frac >= 0.95 && within(elapsed, 600),
        format!("speedup {s:.2}, coverage {covered}/{}, {:.1}s", r.rows.len(), elapsed.as_secs_f64()),
    ))
}

/// Uniform grid of `m^n` boxes.
fn grid(n: usize, m: usize) -> Vec<Geometry<f64>> {
    let h = 1.0 / m as f64;
    (0..m.pow(n as u32))
        .map(|mut k| {
            let mut lo = vec![0.0; n];
            for x in lo.iter_mut() {
                *x = (k % m) as f64 * h;
                k /= m;
            }
            let hi = lo.iter().map(|l| l + h).collect();
            Geometry::Rect(HyperRectangle::new(lo, hi).expect("valid box"))
        })
        .collect()
}

fn exact(f: &Fixture, cells: &[Geometry<f64>]) -> stratmc::Result<(Vec<f64>, Vec<f64>)> {
    let p = cells.iter().map(|g| g.measure()).collect();
    let sigma = cells.iter().map(|g| f.exact_moments(g).map(|m| m.variance.sqrt())).collect::<stratmc::Result<_>>()?;
    Ok((p, sigma))
}

fn variance_ordering() -> anyhow::Result<Outcome> {
    let n = 1000;
    let mut cases = Vec::new();
    for m in [1, 2, 3, 5, 8, 16] {
        cases.push((Fixture::Step { dim: 1, threshold: 0.3 }, grid(1, m)));
    }
    for m in [1, 2, 4, 8] {
        cases.push((Fixture::QuarterDisc, grid(2, m)));
    }
    let mut worst = f64::NEG_INFINITY;
    for (f, cells) in &cases {
        let (p, sigma) = exact(f, cells)?;
        let var_q = f.exact_moments(&Geometry::Rect(HyperRectangle::unit(f.dim())))?.variance;
        let opt = v_opt_hat(&p, &sigma, n)?;
        let prop = v_prop_hat(&p, &sigma, n)?;
        worst = worst.max(opt - prop).max(prop - var_q / n as f64);
    }
    Ok(outcome(worst <= 1e-12, format!("{} grids, largest violation {worst:.3e}", cases.len())))
}

fn random_instance(u: &mut impl FnMut() -> f64) -> (Vec<f64>, Vec<f64>) {
    let k = 1 + (u() * 12.0) as usize;
    let w: Vec<f64> = (0..k).map(|_| 0.01 + u()).collect();
    let total: f64 = w.iter().sum();
    let p = w.iter().map(|x| x / total).collect();
    let sigma = (0..k).map(|_| 10f64.powf(4.0 * u() - 2.0)).collect();
    (p, sigma)
}

fn hybrid_bound() -> anyhow::Result<Outcome> {
    let mut rng = RandomSource::new(7, 0, 0).rng();
    let mut u = || unit_uniform::<f64, _>(&mut rng);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let (p, sigma) = random_instance(&mut u);
        let alpha = 0.001 + 0.998 * u();
        let c = variance_constant(&p, &sigma, alpha)?;
        let bound = (variance_constant(&p, &sigma, 0.0)? / (1.0 - alpha)).min(variance_constant(&p, &sigma, 1.0)? / alpha);
        worst = worst.max((c - bound) / bound);
    }
    Ok(outcome(worst <= 1e-12, format!("1000 instances, largest relative excess {worst:.3e}")))
}

fn gradient() -> anyhow::Result<Outcome> {
    let mut rng = RandomSource::new(8, 0, 0).rng();
    let mut u = || unit_uniform::<f64, _>(&mut rng);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (p, sigma) = random_instance(&mut u);
        let alpha = u();
        let g = variance_constant_gradient(&p, &sigma, alpha)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..sigma.len() {
            let h = 1e-6 * sigma[i];
            let (mut up, mut down) = (sigma.clone(), sigma.clone());
            up[i] += h;
            down[i] -= h;
            let fd = (variance_constant(&p, &up, alpha)? - variance_constant(&p, &down, alpha)?) / (2.0 * h);
            num += (g[i] - fd).powi(2);
            den += g[i].powi(2);
        }
        worst = worst.max((num / den).sqrt());
    }
    Ok(outcome(worst <= 1e-5, format!("100 instances, largest relative error {worst:.3e}")))
}

/// Random refinements of `roots` for `levels` rounds of bisection.
fn refine(roots: Vec<Geometry<f64>>, levels: usize, seed: u64) -> stratmc::Result<Vec<Geometry<f64>>> {
    let mut rng = RandomSource::new(seed, 0, 0).rng();
    let mut cells = roots;
    for _ in 0..levels {
        let i = ((unit_uniform::<f64, _>(&mut rng) * cells.len() as f64) as usize).min(cells.len() - 1);
        let planes = cells[i].enumerate_split_planes();
        let j = ((unit_uniform::<f64, _>(&mut rng) * planes.len() as f64) as usize).min(planes.len() - 1);
        let (a, b) = cells[i].bisect(planes[j])?;
        cells[i] = a;
        cells.push(b);
    }
    Ok(cells)
}

fn split_monotonicity() -> anyhow::Result<Outcome> {
    let fixtures = [
        Fixture::Linear { dim: 1 },
        Fixture::Linear { dim: 2 },
        Fixture::Linear { dim: 3 },
        Fixture::Step { dim: 2, threshold: 0.3 },
        Fixture::DiagonalStep,
        Fixture::QuarterDisc,
    ];
    let mut worst = f64::INFINITY;
    let mut scored = 0usize;
    for f in fixtures {
        let n = f.dim();
        let mut roots = vec![vec![Geometry::Rect(HyperRectangle::unit(n))]];
        if f != Fixture::QuarterDisc {
            let orientation = vec![false; n];
            roots.push(kuhn_decomposition::<f64>(n, &orientation)?.into_iter().map(Geometry::Simplex).collect());
        }
        for (k, root) in roots.into_iter().enumerate() {
            let cells = refine(root, 12, k as u64)?;
            let (p, sigma) = exact(&f, &cells)?;
            for (t, cell) in cells.iter().enumerate() {
                for plane in cell.enumerate_split_planes() {
                    let (a, b) = cell.bisect(plane)?;
                    let (sa, sb) = (f.exact_moments(&a)?.variance.sqrt(), f.exact_moments(&b)?.variance.sqrt());
                    worst = worst.min(score_split(&p, &sigma, t, sa, sb, 0.0)?);
                    scored += 1;
                }
            }
        }
    }
    Ok(outcome(worst >= -1e-12, format!("{scored} candidate splits, smallest score {worst:.3e}")))
}

fn kde_borderline() -> anyhow::Result<Outcome> {
    let samples = [0.37; 10];
    let mut values = Vec::new();
    for delta in [1e-6, 0.1, 10.0] {
        values.push(kde_kurtosis(&samples, &KdeConfig::fixed(delta))?);
    }
    let pass = values.iter().all(|&k| k == 3.0);
    Ok(outcome(pass, format!("kurtosis {values:?}")))
}

fn failure_probability() -> anyhow::Result<Outcome> {
    let sigma2 = 1.0 / 12.0;
    let cells: Vec<(u64, f64)> = [5u64, 10, 20, 50].iter().flat_map(|&n| [0.1, 0.5, 0.9].map(|t| (n, t))).collect();
    let results: Vec<(u64, f64, f64, f64)> = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(n, theta))| {
            let mut rng = RandomSource::new(11, k as u64, 0).rng();
            let trials = 100_000;
            let mut hits = 0u64;
            for _ in 0..trials {
                let s = StratumStats::from_values((0..n).map(|_| unit_uniform::<f64, _>(&mut rng)));
                if s.variance() <= theta * sigma2 {
                    hits += 1;
                }
            }
            let bound = underestimation_bound(n, 1.8, theta)?;
            Ok((n, theta, hits as f64 / trials as f64, bound))
        })
        .collect::<stratmc::Result<_>>()?;
    let bad: Vec<String> = results
        .iter()
        .filter(|r| r.2 > r.3)
        .map(|(n, t, f, b)| format!("N={n} theta={t}: {f:.4} > {b:.4}"))
        .collect();
    let tightest = results.iter().map(|r| r.2 / r.3).fold(0.0, f64::max);
    let detail = if bad.is_empty() {
        format!("12 cells, largest frequency/bound ratio {tightest:.3}")
    } else {
        bad.join("; ")
    };
    Ok(outcome(bad.is_empty(), detail))
}

fn lemma_bounds() -> anyhow::Result<Outcome> {
    let samples = 1000;
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut worst = f64::NEG_INFINITY;
    let mut checks = 0;
    for n in 1..=3 {
        for m in [2usize, 4, 8] {
            let cells = grid(n, m);
            let (p, sigma) = exact(&Fixture::Linear { dim: n }, &cells)?;
            for alpha in alphas {
                let v = hybrid_constant_lenient(&p, &sigma, alpha) / samples as f64;
                let b = cartesian_bound_smooth(n, n as f64, cells.len() as u64, samples, alpha)?;
                worst = worst.max((v - b) / b);
                checks += 1;
            }
        }
    }
    for m in [2usize, 4, 8, 16] {
        let cells = grid(2, m);
        let (p, sigma) = exact(&Fixture::DiagonalStep, &cells)?;
        let t = sigma.iter().filter(|&&s| s > 0.0).count() as u64;
        for alpha in alphas {
            let v = hybrid_constant_lenient(&p, &sigma, alpha) / samples as f64;
            let b = cartesian_bound_jump(1.0, t, cells.len() as u64, samples, alpha)?;
            worst = worst.max((v - b) / b);
            checks += 1;
        }
    }
    Ok(outcome(worst <= 1e-12, format!("{checks} checks, largest relative excess {worst:.3e}")))
}

fn geometry_suite() -> anyhow::Result<Outcome> {
    let mut problems = Vec::new();
    let mut max_vol_err: f64 = 0.0;
    let mut max_half_err: f64 = 0.0;
    let mut max_bary_err: f64 = 0.0;
    let mut rng = RandomSource::new(13, 0, 0).rng();
    for n in 1..=5usize {
        let orientations = orientation_count(n);
        if orientations != 1 << (n - 1) {
            problems.push(format!("n={n}: {orientations} orientations"));
        }
        for o in 0..orientations {
            let simplices = kuhn_decomposition::<f64>(n, &orientation_from_index(n, o))?;
            let expected: usize = (1..=n).product();
            if simplices.len() != expected {
                problems.push(format!("n={n}: {} simplices", simplices.len()));
            }
            let total: f64 = simplices.iter().map(|s| s.measure()).sum();
            max_vol_err = max_vol_err.max((total - 1.0).abs());
            for s in &simplices {
                let g = Geometry::Simplex(s.clone());
                for plane in g.enumerate_split_planes() {
                    let (a, b) = g.bisect(plane)?;
                    let half = g.measure() / 2.0;
                    max_half_err = max_half_err.max(((a.measure() - half).abs()).max((b.measure() - half).abs()) / half);
                }
                for point in g.sample_uniform(&mut rng, 4) {
                    let lambda = s.barycentric(&point)?;
                    let mut back = vec![0.0; n];
                    for (l, v) in lambda.iter().zip(s.vertices()) {
                        for (x, vx) in back.iter_mut().zip(v) {
                            *x += l * vx;
                        }
                    }
                    let err = back.iter().zip(&point).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    max_bary_err = max_bary_err.max(err);
                }
            }
        }
        let cube: Geometry<f64> = Geometry::Rect(HyperRectangle::unit(n));
        for axis in 0..n {
            let (a, b) = cube.bisect(SplitPlaneId::Axis(axis))?;
            max_half_err = max_half_err.max((a.measure() - 0.5).abs().max((b.measure() - 0.5).abs()) / 0.5);
        }
    }
    let pass = problems.is_empty() && max_vol_err <= 1e-12 && max_half_err <= 1e-14 && max_bary_err <= 1e-10;
    let mut detail = format!(
        "volume error {max_vol_err:.2e}, bisection error {max_half_err:.2e}, barycentric error {max_bary_err:.2e}"
    );
    if !problems.is_empty() {
        detail = format!("{detail}; {}", problems.join("; "));
    }
    Ok(outcome(pass, detail))
}

fn determinism() -> anyhow::Result<Outcome> {
    let csv = || -> anyhow::Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_rows(&mut buf, &experiment("hypersphere-2", "hyperrect", 0.9, 10)?.rows)?;
        Ok(buf)
    };
    let (a, b) = (csv()?, csv()?);
    Ok(outcome(a == b, format!("{} and {} bytes, identical: {}", a.len(), b.len(), a == b)))
}

type Check = fn() -> anyhow::Result<Outcome>;

fn main() {
    let criteria: Vec<(&str, Check)> = vec![
        ("01 hypersphere n=2 hyperrect speedup >= 100", || hypersphere(2, "hyperrect", |s| s >= 100.0, 120)),
        ("02 hypersphere n=3 simplex speedup in [8, 80]", || {
            hypersphere(3, "simplex", |s| (8.0..=80.0).contains(&s), 300)
        }),
        ("03 hypersphere n=4 hyperrect speedup >= 3", || hypersphere(4, "hyperrect", |s| s >= 3.0, 300)),
        ("04 fault stress speedup >= 20 and discontinuity isolated", fault),
        ("05 sod speedup >= 5 and 4-sigma coverage >= 95%", sod),
        ("06 variance ordering on exact grids", variance_ordering),
        ("07 hybrid variance simple bound", hybrid_bound),
        ("08 variance constant gradient", gradient),
        ("09 proportional split scores non-negative", split_monotonicity),
        ("10 kde kurtosis of constant samples", kde_borderline),
        ("11 variance underestimation bound", failure_probability),
        ("12 cartesian grid variance bounds", lemma_bounds),
        ("13 geometry suite", geometry_suite),
        ("14 deterministic csv", determinism),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        if !pass {
            failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {failures} of 14 criteria failed");
    if failures > 0 && std::env::var_os("STRATMC_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
