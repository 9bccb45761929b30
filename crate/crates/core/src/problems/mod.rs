//! Benchmark models on the unit hypercube and analytic fixtures with exactly
//! known per-stratum moments.

mod fault;
mod fixtures;
mod hypersphere;
mod sod;

pub use fault::{default_head, FaultStress, FrictionReading};
pub use fixtures::{
    clip_polygon, diagonal_step_fraction, polygon_area, quarter_disc_area, step_fraction, ExactMoments, Fixture,
};
pub use hypersphere::{hypersphere_indicator, hypersphere_mean, hypersphere_radius};
pub use sod::{RiemannSolution, RiemannState, SodShockTube, GAMMA};

use std::fmt;
use std::sync::Arc;

use crate::domain::{ModelFunction, ParameterMap};
use crate::error::{Error, Result};
use crate::scalar::Real;

type UnitFn = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;

/// A named quantity of interest over `[0,1]^n`. Evaluation maps the unit
/// point through `params` internally.
#[derive(Clone)]
pub struct ProblemSpec {
    pub id: String,
    pub dim: usize,
    pub params: ParameterMap<f64>,
    pub description: &'static str,
    pub units: &'static str,
    /// Exact or quadrature mean when one is available.
    pub reference_mean: Option<f64>,
    f: Arc<UnitFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("reference_mean", &self.reference_mean)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(
        id: impl Into<String>,
        params: ParameterMap<f64>,
        description: &'static str,
        units: &'static str,
        f: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), dim: params.dim(), params, description, units, reference_mean: None, f: Arc::new(f) }
    }

    pub fn with_reference_mean(mut self, mean: f64) -> Self {
        self.reference_mean = Some(mean);
        self
    }

    pub fn evaluate(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: u.len() });
        }
        (self.f)(u)
    }

    /// Counted model over the unit cube in scalar type `F`; the problem itself
    /// is evaluated in double precision.
    pub fn model<F: Real>(&self) -> ModelFunction<F> {
        let f = Arc::clone(&self.f);
        ModelFunction::new(self.dim, move |u: &[F]| {
            let x: Vec<f64> = u.iter().map(|v| v.as_f64()).collect();
            f(&x).map(F::lit)
        })
    }
}

/// Identifiers accepted by [`problem_by_id`].
pub fn problem_ids() -> Vec<String> {
    let mut ids: Vec<String> = (1..=6).map(|n| format!("hypersphere-{n}")).collect();
    ids.extend(["fault-stress", "sod", "step-1d", "diagonal-step"].map(String::from));
    ids.extend((1..=4).map(|n| format!("linear-{n}")));
    ids
}

pub fn problem_by_id(id: &str) -> Result<ProblemSpec> {
    if let Some(n) = id.strip_prefix("hypersphere-") {
        let n: usize = n.parse().map_err(|_| unknown(id))?;
        return hypersphere::problem(n);
    }
    if let Some(n) = id.strip_prefix("linear-") {
        let n: usize = n.parse().map_err(|_| unknown(id))?;
        if n == 0 || n > crate::geometry::RECT_MAX_DIM {
            return Err(unknown(id));
        }
        return Ok(Fixture::Linear { dim: n }.problem());
    }
    match id {
        "fault-stress" => FaultStress::default().problem(),
        "sod" => SodShockTube::default().problem(),
        "step-1d" => Ok(Fixture::Step { dim: 1, threshold: 0.5 }.problem()),
        "diagonal-step" => Ok(Fixture::DiagonalStep.problem()),
        _ => Err(unknown(id)),
    }
}

fn unknown(id: &str) -> Error {
    Error::InvalidParameter(format!("unknown problem id '{id}'"))
}
