//! Adaptive stratified Monte Carlo on the unit hypercube.
//!
//! Strata are boxes or simplices that are bisected greedily where that most
//! reduces the variance constant of a hybrid proportional/optimal allocation.
//! Everything numeric is generic over [`Real`]; the aliases below fix the
//! scalar to `f64` (plain names) or `f32` (`32` suffix).
//!
//! ```
//! use stratmc::{AlphaMode, DriverConfig, GeometryKind, ModelFunction};
//!
//! let model = ModelFunction::from_fn(1, |u: &[f64]| u[0] * u[0]);
//! let config = DriverConfig::new(GeometryKind::HyperRectangle, AlphaMode::Fixed(0.5), 2_000, 7);
//! let report = stratmc::run(config, &model).unwrap();
//! assert!((report.estimate - 1.0 / 3.0).abs() < 0.01);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod alpha_control;
pub mod domain;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod problems;
pub mod scalar;
pub mod splitting;
pub mod statistics;
pub mod variance;

pub use alpha_control::AlphaMode;
pub use domain::{normal_quantile, RandomSource, GLOBAL_STREAM};
pub use driver::run;
pub use error::{Error, Result};
pub use geometry::{GeometryKind, Side, SplitPlaneId, RECT_MAX_DIM, SIMPLEX_MAX_DIM};
pub use problems::{problem_by_id, problem_ids, ProblemSpec};
pub use scalar::Real;

pub type UnitPoint = domain::UnitPoint<f64>;
pub type UnitPoint32 = domain::UnitPoint<f32>;
pub type MarginalDistribution = domain::MarginalDistribution<f64>;
pub type MarginalDistribution32 = domain::MarginalDistribution<f32>;
pub type ParameterMap = domain::ParameterMap<f64>;
pub type ParameterMap32 = domain::ParameterMap<f32>;
pub type ModelFunction = domain::ModelFunction<f64>;
pub type ModelFunction32 = domain::ModelFunction<f32>;
pub type Geometry = geometry::Geometry<f64>;
pub type Geometry32 = geometry::Geometry<f32>;
pub type HyperRectangle = geometry::HyperRectangle<f64>;
pub type HyperRectangle32 = geometry::HyperRectangle<f32>;
pub type Simplex = geometry::Simplex<f64>;
pub type Simplex32 = geometry::Simplex<f32>;
pub type StratumStats = statistics::StratumStats<f64>;
pub type StratumStats32 = statistics::StratumStats<f32>;
pub type StrataSummary = variance::StrataSummary<f64>;
pub type StrataSummary32 = variance::StrataSummary<f32>;
pub type HybridParameter = allocation::HybridParameter<f64>;
pub type HybridParameter32 = allocation::HybridParameter<f32>;
pub type TentativeSplitTable = splitting::TentativeSplitTable<f64>;
pub type TentativeSplitTable32 = splitting::TentativeSplitTable<f32>;
pub type AlphaSchedule = alpha_control::AlphaSchedule<f64>;
pub type AlphaSchedule32 = alpha_control::AlphaSchedule<f32>;
pub type Stratification = driver::Stratification<f64>;
pub type Stratification32 = driver::Stratification<f32>;
pub type DriverConfig = driver::DriverConfig<f64>;
pub type DriverConfig32 = driver::DriverConfig<f32>;
pub type RunReport = driver::RunReport<f64>;
pub type RunReport32 = driver::RunReport<f32>;
pub type Driver<'m> = driver::Driver<'m, f64>;
pub type Driver32<'m> = driver::Driver<'m, f32>;
