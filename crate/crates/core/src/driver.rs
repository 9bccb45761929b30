//! The adaptive loop: initial batch, then repeated split / allocate /
//! evaluate / update rounds until the evaluation budget is spent.

use crate::allocation::{
    batch_size, default_reserve_one, sequential_counts, sequential_counts_capped, sequential_counts_reserve_one_capped,
    target_rates,
    DEFAULT_SAMPLING_CONSTANT,
};
use crate::alpha_control::{AlphaMode, AlphaSchedule};
use crate::domain::{ModelFunction, RandomSource, GLOBAL_STREAM};
use crate::error::{Error, Result};
use crate::geometry::{select_initial_tessellation, Geometry, GeometryKind, HyperRectangle, Side};
use crate::scalar::Real;
use crate::splitting::{execute_split, select_split, SplitCandidate, TentativeSplitTable};
use crate::statistics::{kde_kurtosis, kde_std, KdeConfig, StratumStats};

/// One stratum with its running statistics and the samples it holds.
#[derive(Debug, Clone)]
pub struct StratumRecord<F> {
    pub id: u64,
    pub geometry: Geometry<F>,
    pub p: F,
    pub stats: StratumStats<F>,
    pub points: Vec<Vec<F>>,
    pub values: Vec<F>,
    pub table: TentativeSplitTable<F>,
}

impl<F: Real> StratumRecord<F> {
    /// Builds statistics and the tentative split table from `points`, which
    /// must lie in `geometry`.
    pub fn from_samples(id: u64, geometry: Geometry<F>, p: F, points: Vec<Vec<F>>, values: Vec<F>) -> Self {
        let mut rec = Self {
            id,
            table: TentativeSplitTable::new(&geometry),
            geometry,
            p,
            stats: StratumStats::new(),
            points: Vec::with_capacity(points.len()),
            values: Vec::with_capacity(values.len()),
        };
        let (mut scratch, mut sides) = (Vec::new(), Vec::new());
        for (point, value) in points.into_iter().zip(values) {
            rec.push(point, value, &mut scratch, &mut sides);
        }
        rec
    }

    fn push(&mut self, point: Vec<F>, value: F, scratch: &mut Vec<F>, sides: &mut Vec<Side>) {
        self.stats.update(value);
        self.table.record_unchecked(&self.geometry, &point, value, scratch, sides);
        self.points.push(point);
        self.values.push(value);
    }
}

/// The current set of strata, ordered by id.
#[derive(Debug, Clone)]
pub struct Stratification<F> {
    pub strata: Vec<StratumRecord<F>>,
    pub n_total: u64,
    pub iteration: u64,
    pub kind: GeometryKind,
    next_id: u64,
}

impl<F: Real> Stratification<F> {
    /// Strata from geometries covering the cube, each with its samples.
    pub fn from_samples(geometries: Vec<Geometry<F>>, points: Vec<Vec<Vec<F>>>, values: Vec<Vec<F>>) -> Result<Self> {
        if geometries.is_empty() {
            return Err(Error::InvalidParameter("a stratification needs at least one stratum".into()));
        }
        if points.len() != geometries.len() || values.len() != geometries.len() {
            return Err(Error::DimensionMismatch { expected: geometries.len(), got: points.len().min(values.len()) });
        }
        let kind = geometries[0].kind();
        let total: F = geometries.iter().map(Geometry::measure).sum();
        let tol = F::lit(1e-12).max(F::epsilon() * F::from_count(4 * geometries.len() as u64));
        if (total - F::one()).abs() > tol {
            return Err(Error::InvalidParameter(format!("strata measures sum to {total}, not 1")));
        }
        let mut strata = Vec::with_capacity(geometries.len());
        let mut n_total = 0;
        for (id, ((g, pts), vals)) in geometries.into_iter().zip(points).zip(values).enumerate() {
            if pts.len() != vals.len() {
                return Err(Error::DimensionMismatch { expected: pts.len(), got: vals.len() });
            }
            if g.kind() != kind {
                return Err(Error::InvalidParameter("strata must share one shape class".into()));
            }
            if let Some(bad) = pts.iter().find(|p| !g.contains(p)) {
                return Err(Error::InvalidParameter(format!("sample {bad:?} outside its stratum")));
            }
            n_total += pts.len() as u64;
            let p = g.measure();
            strata.push(StratumRecord::from_samples(id as u64, g, p, pts, vals));
        }
        let next_id = strata.len() as u64;
        Ok(Self { strata, n_total, iteration: 0, kind, next_id })
    }

    pub(crate) fn allocate_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn measures(&self) -> Vec<F> {
        self.strata.iter().map(|s| s.p).collect()
    }

    pub fn std_devs(&self) -> Vec<F> {
        self.strata.iter().map(|s| s.stats.std()).collect()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.strata.iter().map(|s| s.stats.count()).collect()
    }

    /// `(sum p_S mu_S, sum p_S^2 sigma_S^2 / N_S)`; every stratum needs a sample.
    pub fn estimate(&self) -> Result<(F, F)> {
        let mut q = F::zero();
        let mut v = F::zero();
        for s in &self.strata {
            let n = s.stats.count();
            if n == 0 {
                return Err(Error::EmptyStratum(s.id));
            }
            q += s.p * s.stats.mean();
            v += s.p * s.p * s.stats.variance() / F::from_count(n);
        }
        Ok((q, v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriverConfig<F> {
    pub geometry: GeometryKind,
    pub alpha: AlphaMode<F>,
    /// Average number of new samples per stratum and iteration.
    pub c: u64,
    pub n_max: u64,
    /// Size of the initial batch; `max(30, 10 n)` when unset.
    pub n_init: Option<u64>,
    /// Samples a stratum needs before it may split; `max(4, 2c)` when unset.
    pub min_samples: Option<u64>,
    /// Reserve one sample per stratum each iteration; on for `alpha > 0.5` when unset.
    pub reserve_one: Option<bool>,
    pub splitting: bool,
    /// Keep plans that exceed the batch size whole, capped by the remaining
    /// budget, instead of trimming them to the batch size.
    pub overflow: bool,
    pub seed: u64,
}

impl<F: Real> DriverConfig<F> {
    pub fn new(geometry: GeometryKind, alpha: AlphaMode<F>, n_max: u64, seed: u64) -> Self {
        Self {
            geometry,
            alpha,
            c: DEFAULT_SAMPLING_CONSTANT,
            n_max,
            n_init: None,
            min_samples: None,
            reserve_one: None,
            splitting: true,
            overflow: true,
            seed,
        }
    }

    pub fn initial_batch(&self, dim: usize) -> u64 {
        self.n_init.unwrap_or_else(|| (10 * dim as u64).max(30))
    }

    pub fn min_samples(&self) -> u64 {
        self.min_samples.unwrap_or_else(|| (2 * self.c).max(4))
    }

    pub fn reserve_one(&self) -> bool {
        self.reserve_one.unwrap_or(match self.alpha {
            AlphaMode::Fixed(a) => default_reserve_one(a),
            AlphaMode::Dynamic { alpha_max, .. } => default_reserve_one(alpha_max),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow<F> {
    pub iteration: u64,
    pub n_total: u64,
    pub n_strata: usize,
    pub split: Option<SplitCandidate<F>>,
    pub v_hat: F,
    /// Allocation parameter used during this iteration.
    pub alpha: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratumReport<F> {
    pub id: u64,
    pub geometry: Geometry<F>,
    pub p: F,
    pub count: u64,
    pub mean: F,
    pub std: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport<F> {
    pub estimate: F,
    pub v_hat: F,
    pub n_strata: usize,
    pub alpha_history: Vec<F>,
    pub rows: Vec<IterationRow<F>>,
    pub evaluations: u64,
    pub strata: Vec<StratumReport<F>>,
}

impl<F: Real> RunReport<F> {
    pub fn final_alpha(&self) -> F {
        self.alpha_history.last().copied().unwrap_or_else(F::zero)
    }
}

/// Runs the adaptive loop for one model and configuration. After an error
/// the driver keeps its state, so [`Driver::partial_report`] remains usable.
pub struct Driver<'m, F> {
    config: DriverConfig<F>,
    model: &'m ModelFunction<F>,
    strat: Stratification<F>,
    schedule: AlphaSchedule<F>,
    rows: Vec<IterationRow<F>>,
    evaluations: u64,
    value_range: (F, F),
}

impl<'m, F: Real> Driver<'m, F> {
    /// Draws the initial batch uniformly on the cube and builds the starting
    /// stratification: the whole cube for boxes, the best Kuhn tessellation
    /// for simplices.
    pub fn new(config: DriverConfig<F>, model: &'m ModelFunction<F>) -> Result<Self> {
        let dim = model.dim();
        Self::check(&config, dim)?;
        let schedule = AlphaSchedule::new(config.alpha)?;
        let n_init = config.initial_batch(dim);
        let cube: Geometry<F> = HyperRectangle::unit(dim).into();
        let mut rng = RandomSource::new(config.seed, GLOBAL_STREAM, 0).rng();
        let points = cube.sample_uniform(&mut rng, n_init as usize);
        let mut values = Vec::with_capacity(points.len());
        let mut evaluations = 0;
        for p in &points {
            values.push(model.evaluate(p)?);
            evaluations += 1;
        }
        let strat = match config.geometry {
            GeometryKind::HyperRectangle => Stratification::from_samples(vec![cube], vec![points], vec![values])?,
            GeometryKind::Simplex => {
                let chosen = select_initial_tessellation(dim, &points, &values, schedule.current())?;
                let cells = chosen.simplices.len();
                let mut pts = vec![Vec::new(); cells];
                let mut vals = vec![Vec::new(); cells];
                for ((p, v), &c) in points.into_iter().zip(values).zip(&chosen.assignment) {
                    pts[c].push(p);
                    vals[c].push(v);
                }
                let geoms = chosen.simplices.into_iter().map(Geometry::from).collect();
                Stratification::from_samples(geoms, pts, vals)?
            }
        };
        Ok(Self::assemble(config, model, strat, schedule, evaluations))
    }

    /// Starts from the given strata instead, drawing the initial batch with
    /// proportional allocation inside them.
    pub fn with_strata(config: DriverConfig<F>, model: &'m ModelFunction<F>, geometries: Vec<Geometry<F>>) -> Result<Self> {
        let dim = model.dim();
        Self::check(&config, dim)?;
        if let Some(g) = geometries.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
        }
        let schedule = AlphaSchedule::new(config.alpha)?;
        let n_init = config.initial_batch(dim);
        let p: Vec<F> = geometries.iter().map(Geometry::measure).collect();
        let plan = sequential_counts(&p, &vec![0; p.len()], 0, n_init)?;
        let mut points = Vec::with_capacity(p.len());
        let mut values = Vec::with_capacity(p.len());
        let mut evaluations = 0;
        for (id, (g, &k)) in geometries.iter().zip(&plan.counts).enumerate() {
            let mut rng = RandomSource::new(config.seed, id as u64, 0).rng();
            let pts = g.sample_uniform(&mut rng, k as usize);
            let mut vals = Vec::with_capacity(pts.len());
            for x in &pts {
                vals.push(model.evaluate(x)?);
                evaluations += 1;
            }
            points.push(pts);
            values.push(vals);
        }
        let strat = Stratification::from_samples(geometries, points, values)?;
        Ok(Self::assemble(config, model, strat, schedule, evaluations))
    }

    fn check(config: &DriverConfig<F>, dim: usize) -> Result<()> {
        let max = config.geometry.max_dim();
        if dim == 0 || dim > max {
            return Err(Error::DimensionOutOfRange { n: dim, max });
        }
        if config.c == 0 {
            return Err(Error::InvalidParameter("sampling constant c must be at least 1".into()));
        }
        let n_init = config.initial_batch(dim);
        if config.n_max < n_init {
            return Err(Error::BudgetTooSmall { n_max: config.n_max, n_init });
        }
        Ok(())
    }

    fn assemble(
        config: DriverConfig<F>,
        model: &'m ModelFunction<F>,
        strat: Stratification<F>,
        schedule: AlphaSchedule<F>,
        evaluations: u64,
    ) -> Self {
        let value_range = strat
            .strata
            .iter()
            .flat_map(|s| s.values.iter())
            .fold((F::infinity(), F::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Self { config, model, strat, schedule, rows: Vec::new(), evaluations, value_range }
    }

    pub fn stratification(&self) -> &Stratification<F> {
        &self.strat
    }

    pub fn config(&self) -> &DriverConfig<F> {
        &self.config
    }

    pub fn alpha(&self) -> F {
        self.schedule.current()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// One round of the loop; returns `false` once the budget is exhausted.
    pub fn iterate(&mut self) -> Result<bool> {
        let remaining = self.config.n_max.saturating_sub(self.strat.n_total);
        if remaining == 0 {
            return Ok(false);
        }
        let k = self.strat.iteration + 1;
        let alpha = self.schedule.current();

        let split = if self.config.splitting {
            select_split(&self.strat, alpha, self.config.min_samples())
        } else {
            None
        };
        if let Some(candidate) = &split {
            execute_split(&mut self.strat, candidate)?;
        }

        let n_new = batch_size(self.strat.strata.len() as u64, self.config.c, remaining)?;
        let rates = target_rates(&self.strat.measures(), &self.strat.std_devs(), alpha)?;
        let counts = self.strat.counts();
        let cap = if self.config.overflow { remaining } else { n_new };
        let plan = if self.config.reserve_one() && n_new >= counts.len() as u64 {
            sequential_counts_reserve_one_capped(&rates.q, &counts, self.strat.n_total, n_new, cap)?
        } else {
            sequential_counts_capped(&rates.q, &counts, self.strat.n_total, n_new, cap)?
        };
        if plan.total() == 0 {
            return Ok(false);
        }

        let (mut point, mut scratch, mut sides) = (Vec::new(), Vec::new(), Vec::new());
        for (rec, &m) in self.strat.strata.iter_mut().zip(&plan.counts) {
            if m == 0 {
                continue;
            }
            let mut rng = RandomSource::new(self.config.seed, rec.id, k).rng();
            for _ in 0..m {
                match &rec.geometry {
                    Geometry::Rect(r) => r.sample_into(&mut rng, &mut point),
                    Geometry::Simplex(s) => s.sample_into(&mut rng, &mut point),
                }
                let value = self.model.evaluate(&point)?;
                self.evaluations += 1;
                self.strat.n_total += 1;
                self.value_range = (self.value_range.0.min(value), self.value_range.1.max(value));
                rec.push(point.clone(), value, &mut scratch, &mut sides);
            }
        }
        self.strat.iteration = k;

        if matches!(self.config.alpha, AlphaMode::Dynamic { .. }) {
            let (sigma, kappa) = self.smoothed_moments()?;
            self.schedule.advance(&self.strat.measures(), &sigma, &kappa, self.strat.n_total);
        } else {
            self.schedule.advance(&[], &[], &[], self.strat.n_total);
        }

        self.rows.push(IterationRow {
            iteration: k,
            n_total: self.strat.n_total,
            n_strata: self.strat.strata.len(),
            split,
            v_hat: self.running_variance(),
            alpha,
        });
        Ok(true)
    }

    /// Deviations and kurtoses for the allocation parameter update: kernel
    /// smoothed kurtoses everywhere, smoothed deviations only where the
    /// sample deviation vanishes.
    fn smoothed_moments(&self) -> Result<(Vec<F>, Vec<F>)> {
        let range = self.value_range.1 - self.value_range.0;
        let kde = KdeConfig::relative_to_range(if range.is_finite() { range } else { F::zero() });
        let mut sigma = Vec::with_capacity(self.strat.strata.len());
        let mut kappa = Vec::with_capacity(self.strat.strata.len());
        for rec in &self.strat.strata {
            if rec.values.is_empty() {
                sigma.push(F::zero());
                kappa.push(F::lit(3.0));
                continue;
            }
            let s = rec.stats.std();
            sigma.push(if s > F::zero() { s } else { kde_std(&rec.values, &kde)? });
            kappa.push(kde_kurtosis(&rec.values, &kde)?.max(F::one()));
        }
        Ok((sigma, kappa))
    }

    fn running_variance(&self) -> F {
        self.strat
            .strata
            .iter()
            .filter(|s| s.stats.count() > 0)
            .map(|s| s.p * s.p * s.stats.variance() / F::from_count(s.stats.count()))
            .sum()
    }

    pub fn finalize(&self) -> Result<RunReport<F>> {
        let (estimate, v_hat) = self.strat.estimate()?;
        Ok(self.report(estimate, v_hat))
    }

    /// Report of the current state; empty strata are left out of the estimate.
    pub fn partial_report(&self) -> RunReport<F> {
        let estimate = self
            .strat
            .strata
            .iter()
            .filter(|s| s.stats.count() > 0)
            .map(|s| s.p * s.stats.mean())
            .sum();
        self.report(estimate, self.running_variance())
    }

    fn report(&self, estimate: F, v_hat: F) -> RunReport<F> {
        RunReport {
            estimate,
            v_hat,
            n_strata: self.strat.strata.len(),
            alpha_history: self.schedule.history.clone(),
            rows: self.rows.clone(),
            evaluations: self.evaluations,
            strata: self
                .strat
                .strata
                .iter()
                .map(|s| StratumReport {
                    id: s.id,
                    geometry: s.geometry.clone(),
                    p: s.p,
                    count: s.stats.count(),
                    mean: s.stats.mean(),
                    std: s.stats.std(),
                })
                .collect(),
        }
    }

    pub fn run(mut self) -> Result<RunReport<F>> {
        while self.iterate()? {}
        self.finalize()
    }
}

/// Initializes, iterates until the budget is spent and assembles the report.
pub fn run<F: Real>(config: DriverConfig<F>, model: &ModelFunction<F>) -> Result<RunReport<F>> {
    Driver::new(config, model)?.run()
}
