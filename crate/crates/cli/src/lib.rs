//! Experiment runner for the adaptive stratified sampler: repeated runs,
//! empirical speedups against plain Monte Carlo, and parameter sweeps written
//! as CSV.

pub mod config;
pub mod experiment;
pub mod reference;

pub use config::{AlphaArg, ExperimentConfig, GeometryArg};
pub use experiment::{run_experiment, run_sweep, ExperimentResult, ResultRow, Summary, SweepGrid};
pub use reference::{reference, Reference};
