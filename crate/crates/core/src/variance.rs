//! Estimator variance analytics: the classic variance estimators, the hybrid
//! variance constant `C_alpha` with its gradient, the fluctuation variance of
//! `C_alpha(sigma_hat)`, confidence intervals and Cartesian-grid bounds.

use crate::domain::normal_quantile;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Measures, standard deviations and (optionally) kurtoses of a stratification.
#[derive(Debug, Clone, PartialEq)]
pub struct StrataSummary<F> {
    pub p: Vec<F>,
    pub sigma: Vec<F>,
    pub kappa: Option<Vec<F>>,
    pub n: u64,
}

impl<F: Real> StrataSummary<F> {
    pub fn new(p: Vec<F>, sigma: Vec<F>, n: u64) -> Result<Self> {
        if p.len() != sigma.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: sigma.len() });
        }
        if p.is_empty() {
            return Err(Error::EmptySamples);
        }
        let total: F = p.iter().copied().sum();
        let tol = F::lit(1e-12).max(F::epsilon() * F::from_count(4 * p.len() as u64));
        if (total - F::one()).abs() > tol || p.iter().any(|&x| !(x > F::zero())) {
            return Err(Error::InvalidParameter(format!("measures must be positive and sum to 1, got {total}")));
        }
        if sigma.iter().any(|&s| !(s >= F::zero())) {
            return Err(Error::InvalidParameter("standard deviations must be non-negative".into()));
        }
        Ok(Self { p, sigma, kappa: None, n })
    }

    pub fn with_kappa(mut self, kappa: Vec<F>) -> Result<Self> {
        if kappa.len() != self.p.len() {
            return Err(Error::DimensionMismatch { expected: self.p.len(), got: kappa.len() });
        }
        if kappa.iter().any(|&k| !(k >= F::one())) {
            return Err(Error::InvalidParameter("kurtosis must be at least 1".into()));
        }
        self.kappa = Some(kappa);
        Ok(self)
    }

    pub fn v_prop_hat(&self) -> Result<F> {
        v_prop_hat(&self.p, &self.sigma, self.n)
    }

    pub fn v_opt_hat(&self) -> Result<F> {
        v_opt_hat(&self.p, &self.sigma, self.n)
    }

    pub fn variance_constant(&self, alpha: F) -> Result<F> {
        variance_constant(&self.p, &self.sigma, alpha)
    }

    pub fn variance_constant_gradient(&self, alpha: F) -> Result<Vec<F>> {
        variance_constant_gradient(&self.p, &self.sigma, alpha)
    }

    pub fn fluctuation_variance(&self, alpha: F) -> Result<F> {
        let kappa = self
            .kappa
            .as_ref()
            .ok_or_else(|| Error::Precondition("fluctuation variance needs kurtoses".into()))?;
        fluctuation_variance(&self.p, &self.sigma, kappa, alpha)
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("need N >= 1".into()));
    }
    Ok(())
}

/// `(1/N) sum p_S sigma_S^2`
pub fn v_prop_hat<F: Real>(p: &[F], sigma: &[F], n: u64) -> Result<F> {
    check_n(n)?;
    Ok(p.iter().zip(sigma).map(|(&p, &s)| p * s * s).sum::<F>() / F::from_count(n))
}

/// `(1/N) (sum p_S sigma_S)^2`
pub fn v_opt_hat<F: Real>(p: &[F], sigma: &[F], n: u64) -> Result<F> {
    check_n(n)?;
    let ps = inner(p, sigma);
    Ok(ps * ps / F::from_count(n))
}

#[inline]
pub(crate) fn inner<F: Real>(p: &[F], sigma: &[F]) -> F {
    p.iter().zip(sigma).map(|(&p, &s)| p * s).sum()
}

fn denominators<F: Real>(sigma: &[F], alpha: F, ps: F) -> Result<Vec<F>> {
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::Domain { value: alpha.as_f64(), domain: "[0,1]" });
    }
    let d: Vec<F> = sigma.iter().map(|&s| alpha * s + (F::one() - alpha) * ps).collect();
    if let Some(i) = d.iter().position(|&d| d == F::zero()) {
        let why = if ps == F::zero() {
            "all standard deviations are zero".to_string()
        } else {
            format!("alpha = {alpha} with sigma = 0 in stratum {i}")
        };
        return Err(Error::ConditionViolated(why));
    }
    Ok(d)
}

/// `C_alpha = <p,sigma> sum p_S sigma_S^2 / (alpha sigma_S + (1-alpha) <p,sigma>)`
pub fn variance_constant<F: Real>(p: &[F], sigma: &[F], alpha: F) -> Result<F> {
    if p.len() != sigma.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: sigma.len() });
    }
    let ps = inner(p, sigma);
    let d = denominators(sigma, alpha, ps)?;
    Ok(ps * p.iter().zip(sigma).zip(&d).map(|((&p, &s), &d)| p * s * s / d).sum::<F>())
}

/// `C_alpha` with zero-deviation strata contributing nothing, which is its
/// continuous extension where the allocation condition fails. Returns zero
/// when every deviation vanishes.
pub fn hybrid_constant_lenient<F: Real>(p: &[F], sigma: &[F], alpha: F) -> F {
    let ps = inner(p, sigma);
    if ps == F::zero() {
        return F::zero();
    }
    let mut total = F::zero();
    for (&p, &s) in p.iter().zip(sigma) {
        if s > F::zero() {
            total += p * s * s / (alpha * s + (F::one() - alpha) * ps);
        }
    }
    ps * total
}

/// Partial derivatives of `C_alpha` with respect to each `sigma_U`.
pub fn variance_constant_gradient<F: Real>(p: &[F], sigma: &[F], alpha: F) -> Result<Vec<F>> {
    if p.len() != sigma.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: sigma.len() });
    }
    let ps = inner(p, sigma);
    let d = denominators(sigma, alpha, ps)?;
    let one_minus = F::one() - alpha;
    let cross: F = p.iter().zip(sigma).zip(&d).map(|((&p, &s), &d)| p * s * s * s / (d * d)).sum();
    Ok(p.iter()
        .zip(sigma)
        .zip(&d)
        .map(|((&pu, &su), &du)| pu * su * ps / du * (F::one() + one_minus * ps / du) + alpha * pu * cross)
        .collect())
}

/// `varsigma_alpha^2 = <grad C, Sigma grad C>` with the diagonal covariance of
/// the standard deviation estimates; strata with `sigma = 0` contribute zero.
pub fn fluctuation_variance<F: Real>(p: &[F], sigma: &[F], kappa: &[F], alpha: F) -> Result<F> {
    if kappa.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: kappa.len() });
    }
    if kappa.iter().any(|&k| !(k >= F::one())) {
        return Err(Error::Precondition("kurtosis must be at least 1".into()));
    }
    if sigma.iter().all(|&s| s == F::zero()) {
        return Ok(F::zero());
    }
    let grad = variance_constant_gradient(p, sigma, alpha)?;
    let ps = inner(p, sigma);
    let four = F::lit(4.0);
    let mut total = F::zero();
    for i in 0..p.len() {
        let s = sigma[i];
        if s == F::zero() {
            continue;
        }
        let diag = s * s * (kappa[i] - F::one()) * ps / (four * p[i] * ((F::one() - alpha) * ps + alpha * s));
        total += diag * grad[i] * grad[i];
    }
    Ok(total)
}

/// `alpha` usable in the analytics: `alpha_max` replaces `alpha = 1` when
/// some deviation is zero. The flag reports the substitution.
pub fn effective_alpha<F: Real>(sigma: &[F], alpha: F, alpha_max: F) -> (F, bool) {
    if alpha >= F::one() && sigma.iter().any(|&s| s == F::zero()) {
        (alpha_max, true)
    } else {
        (alpha, false)
    }
}

/// `q_hat -/+ z_{(1+coverage)/2} sqrt(v_hat)`
pub fn confidence_interval<F: Real>(q_hat: F, v_hat: F, coverage: F) -> Result<(F, F)> {
    if !(v_hat >= F::zero()) {
        return Err(Error::Domain { value: v_hat.as_f64(), domain: "[0,inf)" });
    }
    if !(coverage > F::zero() && coverage < F::one()) {
        return Err(Error::Domain { value: coverage.as_f64(), domain: "(0,1)" });
    }
    let z = F::lit(normal_quantile((1.0 + coverage.as_f64()) / 2.0));
    let half = z * v_hat.sqrt();
    Ok((q_hat - half, q_hat + half))
}

/// `Var(Q) / C_alpha`; infinite when `C_alpha = 0`.
pub fn speedup<F: Real>(var_q: F, c_alpha: F) -> Result<F> {
    if !(var_q >= F::zero() && c_alpha >= F::zero()) {
        return Err(Error::Precondition("variances must be non-negative".into()));
    }
    if c_alpha == F::zero() {
        return Ok(F::infinity());
    }
    Ok(var_q / c_alpha)
}

fn min_inverse<F: Real>(alpha: F) -> F {
    // 1/0 is taken as infinite, so the endpoints give a factor of one.
    let a = if alpha > F::zero() { F::one() / alpha } else { F::infinity() };
    let b = if alpha < F::one() { F::one() / (F::one() - alpha) } else { F::infinity() };
    a.min(b)
}

/// Variance bound for a function with `sup |grad f|^2 <= c` on a uniform
/// Cartesian grid of `strata_count` cells.
pub fn cartesian_bound_smooth<F: Real>(n: usize, c: F, strata_count: u64, n_samples: u64, alpha: F) -> Result<F> {
    if n == 0 || strata_count == 0 || n_samples == 0 || !(c >= F::zero()) {
        return Err(Error::Precondition("need n, |S|, N >= 1 and C >= 0".into()));
    }
    let nf = F::from_count(n as u64);
    let s = F::from_count(strata_count);
    Ok(nf * c / (F::lit(3.0) * F::from_count(n_samples)) * s.powf(-F::lit(2.0) / nf) * min_inverse(alpha))
}

/// Variance bound for a piecewise constant function with jump `delta` whose
/// discontinuity meets `t_count` of the `s_count` cells.
pub fn cartesian_bound_jump<F: Real>(delta: F, t_count: u64, s_count: u64, n_samples: u64, alpha: F) -> Result<F> {
    if t_count > s_count || s_count == 0 || n_samples == 0 || !(delta > F::zero()) {
        return Err(Error::Precondition("need |T| <= |S|, |S|, N >= 1 and delta > 0".into()));
    }
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::Domain { value: alpha.as_f64(), domain: "[0,1]" });
    }
    let gamma = F::from_count(t_count) / F::from_count(s_count);
    let base = delta * delta / (F::lit(4.0) * F::from_count(n_samples));
    let factor = if alpha == F::zero() {
        gamma
    } else if alpha == F::one() {
        gamma * gamma
    } else {
        gamma * (F::one() / (F::one() - alpha)).min(gamma / alpha)
    };
    Ok(base * factor)
}
