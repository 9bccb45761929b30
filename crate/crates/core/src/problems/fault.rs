//! Stress needed to reactivate a fault next to an injection well.

use std::sync::Arc;

use super::ProblemSpec;
use crate::domain::{MarginalDistribution, ParameterMap};
use crate::error::Result;

const WATER_DENSITY: f64 = 1000.0;
const GRAVITY: f64 = 9.81;
const DEPTH: f64 = 2000.0;
const THICKNESS: f64 = 100.0;
const SHEAR_CHANGE: f64 = 20.0;
const NORMAL_STRESS: f64 = 50.0;
const FRICTION_DROP: f64 = 0.8;

/// How the friction coefficient's lognormal parameters `(0.2, 0.7)` are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrictionReading {
    /// Mean and standard deviation of the underlying normal.
    #[default]
    LogScale,
    /// Mean and standard deviation of the friction coefficient itself.
    Moments,
}

/// Steady radial head `A ln(R / r)` with `R = 1000 m` and `A` such that the
/// head is 50 m at a distance of 10 m.
pub fn default_head(r: f64) -> f64 {
    let a = 50.0 / (1000.0f64 / 10.0).ln();
    a * (1000.0 / r).ln()
}

type HeadFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct FaultStress {
    head: Arc<HeadFn>,
    friction: FrictionReading,
}

impl Default for FaultStress {
    fn default() -> Self {
        Self::new(default_head, FrictionReading::LogScale)
    }
}

impl FaultStress {
    pub fn new(head: impl Fn(f64) -> f64 + Send + Sync + 'static, friction: FrictionReading) -> Self {
        Self { head: Arc::new(head), friction }
    }

    pub fn params(&self) -> Result<ParameterMap<f64>> {
        let mu = match self.friction {
            FrictionReading::LogScale => MarginalDistribution::lognormal(0.2, 0.7)?,
            FrictionReading::Moments => MarginalDistribution::lognormal_from_moments(0.2, 0.7)?,
        };
        ParameterMap::new(vec![MarginalDistribution::uniform(10.0, 1000.0)?, mu])
    }

    /// Pore pressure in MPa at the fault for well distance `r`.
    pub fn pressure(&self, r: f64) -> f64 {
        WATER_DENSITY * GRAVITY * (DEPTH + 0.5 * THICKNESS + (self.head)(r)) / 1e6
    }

    /// Coulomb failure function `dsigma mu - dtau`.
    pub fn delta_cff(&self, r: f64, mu: f64) -> f64 {
        (NORMAL_STRESS - self.pressure(r)) * mu - SHEAR_CHANGE
    }

    /// Stress threshold in MPa; exactly zero where the fault is stable.
    pub fn stress_threshold(&self, r: f64, mu: f64) -> f64 {
        if self.delta_cff(r, mu) < 0.0 {
            SHEAR_CHANGE - (NORMAL_STRESS - self.pressure(r)) * mu * FRICTION_DROP
        } else {
            0.0
        }
    }

    /// Coulomb function at a unit-cube point, with `u = 1` mapped to an
    /// infinite friction coefficient.
    pub fn delta_cff_unit(&self, params: &ParameterMap<f64>, u: &[f64]) -> Result<f64> {
        if u[1] >= 1.0 {
            return Ok(f64::INFINITY);
        }
        let x = params.map_point(u)?;
        Ok(self.delta_cff(x[0], x[1]))
    }

    /// Whether the stability boundary passes through the box `[lower, upper]`.
    /// The Coulomb function increases in both unit coordinates, so comparing
    /// the two extreme corners suffices.
    pub fn box_contains_discontinuity(&self, params: &ParameterMap<f64>, lower: &[f64], upper: &[f64]) -> Result<bool> {
        Ok(self.delta_cff_unit(params, lower)? < 0.0 && self.delta_cff_unit(params, upper)? >= 0.0)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let params = self.params()?;
        let map = params.clone();
        let this = self.clone();
        Ok(ProblemSpec::new(
            "fault-stress",
            params,
            "stress threshold for fault reactivation near an injection well",
            "MPa",
            move |u| {
                let x = map.map_point(u)?;
                Ok(this.stress_threshold(x[0], x[1]))
            },
        ))
    }
}
