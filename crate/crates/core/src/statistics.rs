//! Running per-stratum statistics, kernel-smoothed moments and the
//! concentration bounds used to reason about variance misestimation.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Welford accumulator: count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StratumStats<F> {
    count: u64,
    mean: F,
    m2: F,
}

impl<F: Real> StratumStats<F> {
    pub fn new() -> Self {
        Self { count: 0, mean: F::zero(), m2: F::zero() }
    }

    pub fn from_values<I: IntoIterator<Item = F>>(values: I) -> Self {
        let mut s = Self::new();
        for v in values {
            s.update(v);
        }
        s
    }

    pub fn from_parts(count: u64, mean: F, m2: F) -> Result<Self> {
        if count == 0 && (mean != F::zero() || m2 != F::zero()) {
            return Err(Error::InvalidParameter("empty statistics must have zero mean and m2".into()));
        }
        if !(m2 >= F::zero()) {
            return Err(Error::InvalidParameter(format!("negative m2 {m2}")));
        }
        Ok(Self { count, mean, m2 })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> F {
        self.mean
    }

    pub fn m2(&self) -> F {
        self.m2
    }

    /// Unbiased sample variance; zero below two observations.
    pub fn variance(&self) -> F {
        if self.count < 2 {
            F::zero()
        } else {
            self.m2 / F::from_count(self.count - 1)
        }
    }

    pub fn std(&self) -> F {
        self.variance().sqrt()
    }

    pub fn update(&mut self, value: F) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / F::from_count(self.count);
        let m2 = self.m2 + delta * (value - self.mean);
        self.m2 = m2.max(F::zero());
    }

    #[must_use]
    pub fn with(mut self, value: F) -> Self {
        self.update(value);
        self
    }

    /// Pooled statistics of two independent sample sets.
    #[must_use]
    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let (na, nb) = (F::from_count(self.count), F::from_count(other.count));
        let n = na + nb;
        let mean = (na * self.mean + nb * other.mean) / n;
        let d = self.mean - other.mean;
        let m2 = self.m2 + other.m2 + na * nb / n * d * d;
        Self { count: self.count + other.count, mean, m2: m2.max(F::zero()) }
    }
}

pub fn update<F: Real>(stats: StratumStats<F>, value: F) -> StratumStats<F> {
    stats.with(value)
}

pub fn merge<F: Real>(old: &StratumStats<F>, new: &StratumStats<F>) -> StratumStats<F> {
    old.merge(new)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth<F> {
    Fixed(F),
    /// Fraction of the observed sample range.
    Relative(F),
}

/// Kernel bandwidth rule; the effective bandwidth never drops below `floor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeConfig<F> {
    pub rule: Bandwidth<F>,
    pub floor: F,
}

impl<F: Real> Default for KdeConfig<F> {
    fn default() -> Self {
        Self { rule: Bandwidth::Relative(F::lit(0.05)), floor: F::lit(1e-6) }
    }
}

impl<F: Real> KdeConfig<F> {
    pub fn fixed(delta: F) -> Self {
        Self { rule: Bandwidth::Fixed(delta), floor: F::min_positive_value() }
    }

    /// Default relative rule with the floor scaled by the global range of
    /// observed values (or 1 when that range is zero).
    pub fn relative_to_range(global_range: F) -> Self {
        let scale = if global_range > F::zero() { global_range } else { F::one() };
        Self { rule: Bandwidth::Relative(F::lit(0.05)), floor: F::lit(1e-6) * scale }
    }

    pub fn bandwidth(&self, samples: &[F]) -> F {
        let raw = match self.rule {
            Bandwidth::Fixed(d) => d,
            Bandwidth::Relative(frac) => {
                let (lo, hi) = samples
                    .iter()
                    .fold((F::infinity(), F::neg_infinity()), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                if samples.is_empty() {
                    F::zero()
                } else {
                    frac * (hi - lo)
                }
            }
        };
        let floor = if self.floor > F::zero() { self.floor } else { F::min_positive_value() };
        raw.max(floor)
    }
}

/// Raw moments of the Gaussian-kernel density estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeMoments<F> {
    pub m1: F,
    pub m2: F,
    pub m3: F,
    pub m4: F,
    pub bandwidth: F,
}

pub fn kde_moments<F: Real>(samples: &[F], cfg: &KdeConfig<F>) -> Result<KdeMoments<F>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let delta = cfg.bandwidth(samples);
    let n = F::from_count(samples.len() as u64);
    let (mut s1, mut s2, mut s3, mut s4) = (F::zero(), F::zero(), F::zero(), F::zero());
    for &x in samples {
        let x2 = x * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
    }
    let (r1, r2, r3, r4) = (s1 / n, s2 / n, s3 / n, s4 / n);
    let d2 = delta * delta;
    Ok(KdeMoments {
        m1: r1,
        m2: r2 + d2,
        m3: r3 + F::lit(3.0) * d2 * r1,
        m4: r4 + F::lit(6.0) * d2 * r2 + F::lit(3.0) * d2 * d2,
        bandwidth: delta,
    })
}

/// Second and fourth central moments of the samples (divisor `n`), computed
/// after shifting by the first sample so constant inputs give exact zeros.
fn central_moments<F: Real>(samples: &[F]) -> (F, F) {
    let x0 = samples[0];
    let n = F::from_count(samples.len() as u64);
    let mean = samples.iter().map(|&x| x - x0).sum::<F>() / n;
    let (mut c2, mut c4) = (F::zero(), F::zero());
    for &x in samples {
        let d = (x - x0) - mean;
        let d2 = d * d;
        c2 += d2;
        c4 += d2 * d2;
    }
    (c2 / n, c4 / n)
}

/// Kurtosis of the kernel density estimate. Expanding the raw-moment
/// combination around the mean gives `3 + (c4 - 3 c2^2) / (c2 + delta^2)^2`,
/// which is evaluated in that form to avoid cancellation.
pub fn kde_kurtosis<F: Real>(samples: &[F], cfg: &KdeConfig<F>) -> Result<F> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let delta = cfg.bandwidth(samples);
    let (c2, c4) = central_moments(samples);
    let var = c2 + delta * delta;
    Ok(F::lit(3.0) + (c4 - F::lit(3.0) * c2 * c2) / (var * var))
}

/// Standard deviation of the kernel density estimate, `sqrt(c2 + delta^2)`.
pub fn kde_std<F: Real>(samples: &[F], cfg: &KdeConfig<F>) -> Result<F> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let delta = cfg.bandwidth(samples);
    let (c2, _) = central_moments(samples);
    Ok((c2 + delta * delta).sqrt())
}

/// Upper bound on `P(sigma_hat^2 <= theta * sigma^2)` from `n` samples of a
/// variable with kurtosis `kappa`.
pub fn underestimation_bound<F: Real>(n: u64, kappa: F, theta: F) -> Result<F> {
    if n < 2 {
        return Err(Error::Precondition(format!("need at least two samples, got {n}")));
    }
    if !(kappa >= F::one()) {
        return Err(Error::Precondition(format!("kurtosis must be >= 1, got {kappa}")));
    }
    if !(theta >= F::zero() && theta <= F::one()) {
        return Err(Error::Domain { value: theta.as_f64(), domain: "[0,1]" });
    }
    let nf = F::from_count(n);
    let k = kappa - (nf - F::lit(3.0)) / (nf - F::one());
    let g = (F::one() - theta) * (F::one() - theta);
    Ok(k / (nf * g + k))
}

/// Smallest `n >= 2` whose underestimation bound is at most `p_crit`.
pub fn required_samples<F: Real>(kappa: F, theta: F, p_crit: F) -> Result<u64> {
    if !(p_crit > F::zero() && p_crit <= F::one()) {
        return Err(Error::Domain { value: p_crit.as_f64(), domain: "(0,1]" });
    }
    if !(theta >= F::zero() && theta < F::one()) {
        return Err(Error::Infeasible(format!("theta = {theta} admits no finite sample size")));
    }
    if !(kappa >= F::one()) {
        return Err(Error::Precondition(format!("kurtosis must be >= 1, got {kappa}")));
    }
    // The bound is at most (kappa + 1) / (n (1-theta)^2 + kappa + 1), which
    // caps the scan length.
    let g = (F::one() - theta) * (F::one() - theta);
    let cap = ((kappa + F::one()) * (F::one() - p_crit) / (p_crit * g)).ceil().as_f64();
    let cap = if cap.is_finite() { (cap as u64).max(2) + 1 } else { u64::MAX };
    let mut n = 2;
    while n <= cap {
        if underestimation_bound(n, kappa, theta)? <= p_crit {
            return Ok(n);
        }
        n += 1;
    }
    Err(Error::Infeasible("no sample size satisfies the tolerance".into()))
}

/// A probability bound; `vacuous` marks values above one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBound<F> {
    pub value: F,
    pub vacuous: bool,
}

impl<F: Real> ProbabilityBound<F> {
    fn new(value: F) -> Self {
        Self { value, vacuous: value > F::one() }
    }
}

/// Hoeffding-type bound on `P(|V_prop_hat - V_prop| >= vartheta)` given
/// almost-sure bounds `m` on the strata standard deviation estimates.
pub fn concentration_bound_prop<F: Real>(p: &[F], m: &[F], vartheta: F, n: u64) -> Result<ProbabilityBound<F>> {
    if p.len() != m.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: m.len() });
    }
    if !(vartheta > F::zero()) || n == 0 || m.iter().any(|&x| !(x >= F::zero())) {
        return Err(Error::Precondition("need vartheta > 0, N >= 1 and M_S >= 0".into()));
    }
    let denom: F = p.iter().zip(m).map(|(&p, &m)| p * p * m.powi(4)).sum();
    let nf = F::from_count(n);
    let value = F::lit(2.0) * (-(F::lit(2.0) * vartheta * vartheta * nf * nf) / denom).exp();
    Ok(ProbabilityBound::new(value))
}

/// Bias of the optimal-allocation variance estimator, summed over ordered
/// pairs of distinct strata.
pub fn optimal_estimator_bias<F: Real>(p: &[F], sigma: &[F], b: &[F]) -> F {
    let mut total = F::zero();
    for s in 0..p.len() {
        for t in 0..p.len() {
            if s != t {
                total += p[s] * p[t] * (b[s] * b[t] + b[s] * sigma[t] + b[t] * sigma[s]);
            }
        }
    }
    total
}

/// Bound on `P(|V_opt_hat - V_opt| >= vartheta)`; requires `vartheta > |B| / N`.
pub fn concentration_bound_opt<F: Real>(
    p: &[F],
    m: &[F],
    sigma: &[F],
    b: &[F],
    vartheta: F,
    n: u64,
) -> Result<ProbabilityBound<F>> {
    let k = p.len();
    for (len, _name) in [(m.len(), "M"), (sigma.len(), "sigma"), (b.len(), "b")] {
        if len != k {
            return Err(Error::DimensionMismatch { expected: k, got: len });
        }
    }
    if n == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    let bias = optimal_estimator_bias(p, sigma, b);
    let nf = F::from_count(n);
    if !(vartheta > bias.abs() / nf) {
        return Err(Error::Precondition(format!("vartheta = {vartheta} must exceed |B|/N = {}", bias.abs() / nf)));
    }
    let s: F = p.iter().zip(m).map(|(&p, &m)| p * m).sum();
    let gap = bias.abs() - vartheta * nf;
    let value = F::lit(2.0) * (-(F::lit(2.0) * gap * gap) / s.powi(4)).exp();
    Ok(ProbabilityBound::new(value))
}
