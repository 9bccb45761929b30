//! Unit-hypercube points, marginal distributions mapped through their inverse
//! CDFs, counted model functions and reproducible random streams.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point of the unit hypercube `[0,1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPoint<F>(Vec<F>);

impl<F: Real> UnitPoint<F> {
    pub fn new(coords: Vec<F>) -> Result<Self> {
        for &c in &coords {
            if !(c >= F::zero() && c <= F::one()) {
                return Err(Error::Domain { value: c.as_f64(), domain: "[0,1]" });
            }
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[F] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<F> {
        self.0
    }
}

impl<F> AsRef<[F]> for UnitPoint<F> {
    fn as_ref(&self) -> &[F] {
        &self.0
    }
}

/// One-dimensional input distribution, parameterized in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalDistribution<F> {
    Uniform { a: F, b: F },
    /// `mu` and `sigma` are the mean and standard deviation of the underlying normal.
    LogNormal { mu: F, sigma: F },
    Exponential { mean: F },
}

impl<F: Real> MarginalDistribution<F> {
    pub fn uniform(a: F, b: F) -> Result<Self> {
        let d = Self::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn lognormal(mu: F, sigma: F) -> Result<Self> {
        let d = Self::LogNormal { mu, sigma };
        d.validate()?;
        Ok(d)
    }

    /// Lognormal variable specified by its own mean and standard deviation.
    pub fn lognormal_from_moments(mean: F, std: F) -> Result<Self> {
        if !(mean > F::zero() && std > F::zero()) {
            return Err(Error::InvalidParameter(format!(
                "lognormal moments need mean > 0 and std > 0, got ({mean}, {std})"
            )));
        }
        let ratio = std / mean;
        let s2 = (F::one() + ratio * ratio).ln();
        Self::lognormal(mean.ln() - s2 / F::lit(2.0), s2.sqrt())
    }

    pub fn exponential(mean: F) -> Result<Self> {
        let d = Self::Exponential { mean };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Uniform { a, b } => a < b,
            Self::LogNormal { sigma, .. } => sigma > F::zero(),
            Self::Exponential { mean } => mean > F::zero(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid marginal {self:?}")))
        }
    }

    pub fn mean(&self) -> F {
        match *self {
            Self::Uniform { a, b } => (a + b) / F::lit(2.0),
            Self::LogNormal { mu, sigma } => (mu + sigma * sigma / F::lit(2.0)).exp(),
            Self::Exponential { mean } => mean,
        }
    }

    pub fn variance(&self) -> F {
        match *self {
            Self::Uniform { a, b } => (b - a) * (b - a) / F::lit(12.0),
            Self::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                (s2.exp() - F::one()) * (F::lit(2.0) * mu + s2).exp()
            }
            Self::Exponential { mean } => mean * mean,
        }
    }

    /// Quantile function `F^{-1}(u)`.
    pub fn inverse_cdf(&self, u: F) -> Result<F> {
        if !(u >= F::zero() && u <= F::one()) {
            return Err(Error::Domain { value: u.as_f64(), domain: "[0,1]" });
        }
        Ok(match *self {
            Self::Uniform { a, b } => a + (b - a) * u,
            Self::LogNormal { mu, sigma } => {
                let z = F::lit(normal_quantile(u.as_f64()));
                (mu + sigma * z).exp()
            }
            Self::Exponential { mean } => -mean * (-u).ln_1p(),
        })
    }
}

pub fn inverse_cdf<F: Real>(marginal: &MarginalDistribution<F>, u: F) -> Result<F> {
    marginal.inverse_cdf(u)
}

/// Independent product of marginals, one per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMap<F> {
    marginals: Vec<MarginalDistribution<F>>,
}

impl<F: Real> ParameterMap<F> {
    pub fn new(marginals: Vec<MarginalDistribution<F>>) -> Result<Self> {
        for m in &marginals {
            m.validate()?;
        }
        Ok(Self { marginals })
    }

    /// Identity map on `[0,1]^n`.
    pub fn unit(n: usize) -> Self {
        Self {
            marginals: vec![MarginalDistribution::Uniform { a: F::zero(), b: F::one() }; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[MarginalDistribution<F>] {
        &self.marginals
    }

    pub fn map_point(&self, u: &[F]) -> Result<Vec<F>> {
        if u.len() != self.marginals.len() {
            return Err(Error::DimensionMismatch { expected: self.marginals.len(), got: u.len() });
        }
        self.marginals.iter().zip(u).map(|(m, &x)| m.inverse_cdf(x)).collect()
    }
}

pub fn map_point<F: Real>(pm: &ParameterMap<F>, u: &UnitPoint<F>) -> Result<Vec<F>> {
    pm.map_point(u.coords())
}

type ModelFn<F> = dyn Fn(&[F]) -> Result<F> + Send + Sync;

/// A deterministic quantity of interest on the unit hypercube with an
/// evaluation counter.
pub struct ModelFunction<F> {
    dim: usize,
    f: Box<ModelFn<F>>,
    evaluations: AtomicU64,
}

impl<F: Real> ModelFunction<F> {
    pub fn new(dim: usize, f: impl Fn(&[F]) -> Result<F> + Send + Sync + 'static) -> Self {
        Self { dim, f: Box::new(f), evaluations: AtomicU64::new(0) }
    }

    /// Wraps an infallible closure.
    pub fn from_fn(dim: usize, f: impl Fn(&[F]) -> F + Send + Sync + 'static) -> Self {
        Self::new(dim, move |u| Ok(f(u)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluate(&self, u: &[F]) -> Result<F> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: u.len() });
        }
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        (self.f)(u)
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.evaluations.store(0, Ordering::Relaxed);
    }
}

impl<F> fmt::Debug for ModelFunction<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelFunction")
            .field("dim", &self.dim)
            .field("evaluations", &self.evaluations.load(Ordering::Relaxed))
            .finish()
    }
}

/// Identifies an independent random stream: one per (seed, stratum, iteration).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    pub seed: u64,
    pub stratum: u64,
    pub iteration: u64,
}

/// Stream id reserved for draws that do not belong to a stratum (the initial batch).
pub const GLOBAL_STREAM: u64 = u64::MAX;

impl RandomSource {
    pub fn new(seed: u64, stratum: u64, iteration: u64) -> Self {
        Self { seed, stratum, iteration }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let key = splitmix64(self.seed ^ splitmix64(self.stratum.wrapping_add(0x632b_e59b_d9b4_e019)));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(self.iteration);
        rng
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw in `[0,1)` converted to the scalar type; `f32` rounding is
/// clamped so the result stays below one.
#[inline]
pub fn unit_uniform<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    let x = F::lit(rng.random::<f64>());
    if x < F::one() {
        x
    } else {
        F::one() - F::epsilon()
    }
}

/// Standard normal quantile (Wichura's AS241 rational approximation,
/// relative accuracy about 1e-16).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
                + 6.726_577_092_700_87e4)
                * r
                + 4.592_195_393_154_987e4)
                * r
                + 1.373_169_376_550_946e4)
                * r
                + 1.971_590_950_306_551_3e3)
                * r
                + 1.331_416_678_917_843_8e2)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
                + 3.930_789_580_009_271e4)
                * r
                + 2.121_379_430_158_659_7e4)
                * r
                + 5.394_196_021_424_751e3)
                * r
                + 6.871_870_074_920_579e2)
                * r
                + 4.231_333_070_160_091e1)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 1.519_866_656_361_645_7e-2)
                * r
                + 1.481_039_764_274_800_8e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.010_334_399_292_288e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 1.369_298_809_227_358e-1)
                * r
                + 5.998_322_065_558_88e-1)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}
