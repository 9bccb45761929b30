//! Sample allocation: target rates for the hybrid rule and the integer
//! per-iteration plans that steer stratum counts toward them.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::variance::inner;

pub const DEFAULT_ALPHA_MAX: f64 = 0.95;
pub const DEFAULT_SAMPLING_CONSTANT: u64 = 10;

/// Blend between proportional (`alpha = 0`) and optimal (`alpha = 1`) allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridParameter<F> {
    alpha: F,
    alpha_max: F,
}

impl<F: Real> HybridParameter<F> {
    pub fn new(alpha: F, alpha_max: F) -> Result<Self> {
        if !(alpha_max >= F::zero() && alpha_max <= F::one()) {
            return Err(Error::Domain { value: alpha_max.as_f64(), domain: "[0,1]" });
        }
        if !(alpha >= F::zero() && alpha <= alpha_max) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, {alpha_max}]")));
        }
        Ok(Self { alpha, alpha_max })
    }

    pub fn with_default_max(alpha: F) -> Result<Self> {
        Self::new(alpha, F::lit(DEFAULT_ALPHA_MAX))
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn alpha_max(&self) -> F {
        self.alpha_max
    }
}

/// Target sampling rates; `fallback` is set when optimal weighting was
/// impossible because every deviation is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates<F> {
    pub q: Vec<F>,
    pub fallback: bool,
}

/// `q_S = (1 - alpha) p_S + alpha p_S sigma_S / <p, sigma>`
pub fn target_rates<F: Real>(p: &[F], sigma: &[F], alpha: F) -> Result<Rates<F>> {
    if p.len() != sigma.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: sigma.len() });
    }
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::Domain { value: alpha.as_f64(), domain: "[0,1]" });
    }
    if sigma.iter().any(|&s| !(s >= F::zero())) {
        return Err(Error::InvalidParameter("standard deviations must be non-negative".into()));
    }
    let ps = inner(p, sigma);
    if ps == F::zero() || alpha == F::zero() {
        return Ok(Rates { q: p.to_vec(), fallback: alpha > F::zero() });
    }
    let q = p
        .iter()
        .zip(sigma)
        .map(|(&p, &s)| (F::one() - alpha) * p + alpha * p * s / ps)
        .collect();
    Ok(Rates { q, fallback: false })
}

/// New samples per stratum for one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationPlan {
    pub counts: Vec<u64>,
}

impl AllocationPlan {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn ceil_target<F: Real>(total: u64, q: F) -> i64 {
    (F::from_count(total) * q).ceil().to_i64().unwrap_or(i64::MAX)
}

/// Removes single samples from the stratum whose remaining deficit
/// (target minus planned count) is smallest, ties to the highest index,
/// until the plan fits `budget`. Counts never drop below `floor`.
fn truncate(counts: &mut [u64], deficits: &mut [i64], floor: u64, budget: u64) {
    let mut total: u64 = counts.iter().sum();
    while total > budget {
        let Some(s) = (0..counts.len())
            .filter(|&s| counts[s] > floor)
            .min_by(|&a, &b| deficits[a].cmp(&deficits[b]).then(b.cmp(&a)))
        else {
            break;
        };
        counts[s] -= 1;
        deficits[s] += 1;
        total -= 1;
    }
}

fn check_lengths<F>(q: &[F], current: &[u64]) -> Result<()> {
    if q.len() != current.len() {
        return Err(Error::DimensionMismatch { expected: q.len(), got: current.len() });
    }
    Ok(())
}

/// `N_new,S = max(0, min(ceil((N_total + N_new) q_S - N_S), N_new))`, truncated
/// to the batch size when the sum exceeds it.
pub fn sequential_counts<F: Real>(q: &[F], current: &[u64], n_total: u64, n_new: u64) -> Result<AllocationPlan> {
    sequential_counts_capped(q, current, n_total, n_new, n_new)
}

/// [`sequential_counts`] with the truncation threshold decoupled from the
/// batch size; plans larger than `n_new` are kept whole up to `cap`.
pub fn sequential_counts_capped<F: Real>(
    q: &[F],
    current: &[u64],
    n_total: u64,
    n_new: u64,
    cap: u64,
) -> Result<AllocationPlan> {
    check_lengths(q, current)?;
    let goal = n_total + n_new;
    let mut counts = Vec::with_capacity(q.len());
    let mut deficits = Vec::with_capacity(q.len());
    for (&q, &have) in q.iter().zip(current) {
        let raw = ceil_target(goal, q) - have as i64;
        let c = raw.min(n_new as i64).max(0);
        counts.push(c as u64);
        deficits.push(raw - c);
    }
    truncate(&mut counts, &mut deficits, 0, cap);
    Ok(AllocationPlan { counts })
}

/// Like [`sequential_counts`] but every stratum first receives one sample:
/// `1 + max(0, min(ceil((N_total + N_new - N_strata) q_S - N_S), N_new - N_strata))`.
pub fn sequential_counts_reserve_one<F: Real>(
    q: &[F],
    current: &[u64],
    n_total: u64,
    n_new: u64,
) -> Result<AllocationPlan> {
    sequential_counts_reserve_one_capped(q, current, n_total, n_new, n_new)
}

/// Reserve-one counterpart of [`sequential_counts_capped`].
pub fn sequential_counts_reserve_one_capped<F: Real>(
    q: &[F],
    current: &[u64],
    n_total: u64,
    n_new: u64,
    cap: u64,
) -> Result<AllocationPlan> {
    check_lengths(q, current)?;
    let strata = q.len() as u64;
    if n_new < strata || cap < strata {
        return Err(Error::Precondition(format!("batch of {n_new} cannot reserve one sample for {strata} strata")));
    }
    let free = n_new - strata;
    let goal = n_total + free;
    let mut counts = Vec::with_capacity(q.len());
    let mut deficits = Vec::with_capacity(q.len());
    for (&q, &have) in q.iter().zip(current) {
        let raw = ceil_target(goal, q) - have as i64;
        let extra = raw.min(free as i64).max(0);
        counts.push(1 + extra as u64);
        deficits.push(raw - extra);
    }
    truncate(&mut counts, &mut deficits, 1, cap);
    Ok(AllocationPlan { counts })
}

/// `c` new samples per stratum on average, clipped to the remaining budget.
pub fn batch_size(n_strata: u64, c: u64, remaining: u64) -> Result<u64> {
    if c == 0 || n_strata == 0 {
        return Err(Error::InvalidParameter("need c >= 1 and at least one stratum".into()));
    }
    Ok(c.saturating_mul(n_strata).min(remaining))
}

/// Reserve-one mode is on by default for strongly optimal allocation.
pub fn default_reserve_one<F: Real>(alpha: F) -> bool {
    alpha > F::lit(0.5)
}
