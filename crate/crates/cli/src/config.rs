use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use stratmc::alpha_control::{DEFAULT_GRID_STEP, DEFAULT_TAU};
use stratmc::allocation::{DEFAULT_ALPHA_MAX, DEFAULT_SAMPLING_CONSTANT};
use stratmc::{AlphaMode, DriverConfig, GeometryKind};

/// `hyperrect` or `simplex` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeometryArg(pub GeometryKind);

impl FromStr for GeometryArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hyperrect" | "rect" | "hyperrectangle" => Ok(Self(GeometryKind::HyperRectangle)),
            "simplex" => Ok(Self(GeometryKind::Simplex)),
            other => bail!("unknown geometry '{other}' (expected hyperrect or simplex)"),
        }
    }
}

impl fmt::Display for GeometryArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            GeometryKind::HyperRectangle => "hyperrect",
            GeometryKind::Simplex => "simplex",
        })
    }
}

/// A fixed allocation parameter or `dynamic`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaArg {
    Fixed(f64),
    Dynamic,
}

impl FromStr for AlphaArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "dynamic" {
            return Ok(Self::Dynamic);
        }
        let v: f64 = s.parse().with_context(|| format!("alpha must be a number or 'dynamic', got '{s}'"))?;
        Ok(Self::Fixed(v))
    }
}

impl fmt::Display for AlphaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(v) => write!(f, "{v}"),
            Self::Dynamic => f.write_str("dynamic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub geometry: GeometryArg,
    pub alpha: AlphaArg,
    pub tau: f64,
    pub alpha_max: f64,
    pub c: u64,
    pub n_max: u64,
    pub reps: u64,
    pub seed: u64,
    pub min_samples: Option<u64>,
    pub reserve_one: Option<bool>,
    /// Trim every iteration's plan to `c * strata` samples.
    pub truncate_batch: bool,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "hypersphere-2".into(),
            geometry: GeometryArg(GeometryKind::HyperRectangle),
            alpha: AlphaArg::Fixed(0.9),
            tau: DEFAULT_TAU,
            alpha_max: DEFAULT_ALPHA_MAX,
            c: DEFAULT_SAMPLING_CONSTANT,
            n_max: 10_000,
            reps: 100,
            seed: 0,
            min_samples: None,
            reserve_one: None,
            truncate_batch: false,
            out: None,
            timing: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e| anyhow!("bad value '{value}' for {key}: {e}"))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting. Keys match the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "problem" => self.problem = value.trim().to_string(),
            "geometry" => self.geometry = value.parse()?,
            "alpha" => self.alpha = value.parse()?,
            "tau" => self.tau = parse(&key, value)?,
            "alpha-max" => self.alpha_max = parse(&key, value)?,
            "c" => self.c = parse(&key, value)?,
            "n-max" => self.n_max = parse(&key, value)?,
            "reps" => self.reps = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "min-samples" => self.min_samples = Some(parse(&key, value)?),
            "reserve-one" => self.reserve_one = Some(parse(&key, value)?),
            "truncate-batch" => self.truncate_batch = parse(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "timing" => self.timing = parse(&key, value)?,
            _ => bail!("unknown config key '{key}'"),
        }
        Ok(())
    }

    /// Reads a line-oriented `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            self.set(k, v).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn alpha_mode(&self) -> AlphaMode<f64> {
        match self.alpha {
            AlphaArg::Fixed(a) => AlphaMode::Fixed(a),
            AlphaArg::Dynamic => {
                AlphaMode::Dynamic { tau: self.tau, alpha_max: self.alpha_max, step: DEFAULT_GRID_STEP }
            }
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.reps == 0 {
            bail!("reps must be at least 1");
        }
        if self.c == 0 {
            bail!("c must be at least 1");
        }
        if let AlphaArg::Fixed(a) = self.alpha {
            if !(0.0..=DEFAULT_ALPHA_MAX).contains(&a) {
                bail!("fixed alpha must lie in [0, {DEFAULT_ALPHA_MAX}], got {a}");
            }
        }
        self.alpha_mode().validate()?;
        let probe = self.driver_config(0);
        let n_init = probe.initial_batch(dim);
        if self.n_max < n_init {
            bail!("n-max {} is below the initial batch of {n_init}", self.n_max);
        }
        if let Some(m) = self.min_samples {
            if m < 2 {
                bail!("min-samples must be at least 2");
            }
        }
        Ok(())
    }

    pub fn driver_config(&self, seed: u64) -> DriverConfig {
        let mut cfg = DriverConfig::new(self.geometry.0, self.alpha_mode(), self.n_max, seed);
        cfg.c = self.c;
        cfg.min_samples = self.min_samples;
        cfg.reserve_one = self.reserve_one;
        cfg.overflow = !self.truncate_batch;
        cfg
    }

    /// `problem_geometry_alpha_c_Nmax`, used for sweep file names.
    pub fn cell_name(&self) -> String {
        format!("{}_{}_{}_{}_{}", self.problem, self.geometry, self.alpha, self.c, self.n_max)
    }

    pub fn alpha_label(&self) -> String {
        match self.alpha {
            AlphaArg::Fixed(a) => format!("fixed({a})"),
            AlphaArg::Dynamic => "dynamic".into(),
        }
    }
}
