//! Dynamic choice of the hybrid allocation parameter from an upper
//! confidence bound on the estimator variance.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::variance::{fluctuation_variance, variance_constant};

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_GRID_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode<F> {
    Fixed(F),
    Dynamic { tau: F, alpha_max: F, step: F },
}

impl<F: Real> AlphaMode<F> {
    pub fn dynamic() -> Self {
        Self::Dynamic {
            tau: F::lit(DEFAULT_TAU),
            alpha_max: F::lit(crate::allocation::DEFAULT_ALPHA_MAX),
            step: F::lit(DEFAULT_GRID_STEP),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Fixed(a) => {
                if !(a >= F::zero() && a <= F::one()) {
                    return Err(Error::Domain { value: a.as_f64(), domain: "[0,1]" });
                }
            }
            Self::Dynamic { tau, alpha_max, step } => {
                if !(tau > F::zero() && tau <= F::one()) {
                    return Err(Error::Domain { value: tau.as_f64(), domain: "(0,1]" });
                }
                if !(alpha_max >= F::zero() && alpha_max <= F::one()) {
                    return Err(Error::Domain { value: alpha_max.as_f64(), domain: "[0,1]" });
                }
                if !(step > F::zero()) {
                    return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
                }
            }
        }
        Ok(())
    }

    /// Value used before any statistics exist; dynamic runs start proportional.
    pub fn initial(&self) -> F {
        match *self {
            Self::Fixed(a) => a,
            Self::Dynamic { .. } => F::zero(),
        }
    }
}

/// The allocation parameter mode together with the value used in each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSchedule<F> {
    pub mode: AlphaMode<F>,
    pub history: Vec<F>,
}

impl<F: Real> AlphaSchedule<F> {
    pub fn new(mode: AlphaMode<F>) -> Result<Self> {
        mode.validate()?;
        Ok(Self { history: vec![mode.initial()], mode })
    }

    pub fn current(&self) -> F {
        *self.history.last().expect("history starts non-empty")
    }

    /// Appends the next value: unchanged in fixed mode, re-optimized otherwise.
    pub fn advance(&mut self, p: &[F], sigma: &[F], kappa: &[F], n: u64) -> F {
        let next = match self.mode {
            AlphaMode::Fixed(a) => a,
            AlphaMode::Dynamic { tau, alpha_max, step } => update_alpha(p, sigma, kappa, n, tau, alpha_max, step),
        };
        self.history.push(next);
        next
    }
}

/// `J(alpha) = C_alpha(sigma) + varsigma_alpha / sqrt(N)`, the upper end of the
/// one-standard-error band for the variance constant.
pub fn objective_j<F: Real>(p: &[F], sigma: &[F], kappa: &[F], n: u64, alpha: F) -> Result<F> {
    if n == 0 {
        return Err(Error::Precondition("need N >= 1".into()));
    }
    let c = variance_constant(p, sigma, alpha)?;
    let v = fluctuation_variance(p, sigma, kappa, alpha)?;
    Ok(c + v.max(F::zero()).sqrt() / F::from_count(n).sqrt())
}

fn grid<F: Real>(alpha_max: F, step: F) -> impl Iterator<Item = F> {
    let count = (alpha_max / step + F::lit(1e-9)).floor().to_u64().unwrap_or(0);
    (0..=count).map(move |k| (F::from_count(k) * step).min(alpha_max))
}

/// Smallest grid value whose objective lies within `(1 - tau) J*` of the grid
/// minimum `J*`. Grid points violating the allocation condition are skipped;
/// zero is returned when none remain.
pub fn update_alpha<F: Real>(p: &[F], sigma: &[F], kappa: &[F], n: u64, tau: F, alpha_max: F, step: F) -> F {
    let values: Vec<(F, F)> = grid(alpha_max, step)
        .filter_map(|a| objective_j(p, sigma, kappa, n, a).ok().filter(|j| j.is_finite()).map(|j| (a, j)))
        .collect();
    let Some(j_star) = values.iter().map(|&(_, j)| j).reduce(F::min) else {
        return F::zero();
    };
    let band = (F::one() - tau) * j_star;
    values.iter().find(|&&(_, j)| j - j_star <= band).map_or(F::zero(), |&(a, _)| a)
}
