use std::f64::consts::PI;

use super::ProblemSpec;
use crate::domain::ParameterMap;
use crate::error::{Error, Result};

/// `Gamma(n/2 + 1)` for integer `n`.
fn gamma_half_plus_one(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        (1..=n / 2).map(|k| k as f64).product()
    } else {
        // Gamma(k + 3/2) = (k + 1/2)(k - 1/2)...(1/2) sqrt(pi)
        let k = n / 2;
        (0..=k).map(|j| j as f64 + 0.5).product::<f64>() * PI.sqrt()
    }
}

/// Radius of the `n`-ball whose volume is `2^(n-1)`, so the ball covers half
/// of the cube `[-1,1]^n`.
pub fn hypersphere_radius(n: usize) -> Result<f64> {
    if !(1..=6).contains(&n) {
        return Err(Error::DimensionOutOfRange { n, max: 6 });
    }
    let nf = n as f64;
    Ok((2f64.powi(n as i32 - 1) * gamma_half_plus_one(n) / PI.powf(nf / 2.0)).powf(1.0 / nf))
}

/// `1{|u|^2 <= r_n^2}`
pub fn hypersphere_indicator(n: usize) -> Result<impl Fn(&[f64]) -> f64 + Send + Sync + Clone> {
    let r = hypersphere_radius(n)?;
    let r2 = r * r;
    Ok(move |u: &[f64]| if u.iter().map(|x| x * x).sum::<f64>() <= r2 { 1.0 } else { 0.0 })
}

/// Mean of the indicator over `[0,1]^n`. Exactly one half while the ball
/// stays inside the cube (`n <= 3`); beyond that the last coordinate is
/// integrated analytically over a midpoint grid in the others.
pub fn hypersphere_mean(n: usize) -> Result<f64> {
    let r = hypersphere_radius(n)?;
    if r <= 1.0 {
        return Ok(0.5);
    }
    let r2 = r * r;
    let inner = n - 1;
    let m = (1e7f64.powf(1.0 / inner as f64)).floor() as usize;
    let h = 1.0 / m as f64;
    let cells = m.pow(inner as u32);
    let mut total = 0.0;
    let mut idx = vec![0usize; inner];
    for _ in 0..cells {
        let s: f64 = idx.iter().map(|&i| ((i as f64 + 0.5) * h).powi(2)).sum();
        if s < r2 {
            total += (r2 - s).sqrt().min(1.0);
        }
        for d in idx.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    Ok(total / cells as f64)
}

pub(super) fn problem(n: usize) -> Result<ProblemSpec> {
    let f = hypersphere_indicator(n)?;
    let mean = hypersphere_mean(n)?;
    Ok(ProblemSpec::new(
        format!("hypersphere-{n}"),
        ParameterMap::unit(n),
        "indicator of the ball of radius r_n centred at the origin",
        "1",
        move |u| Ok(f(u)),
    )
    .with_reference_mean(mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RandomSource;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn radius_examples() {
        assert_relative_eq!(hypersphere_radius(1).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(hypersphere_radius(2).unwrap(), (2.0 / PI).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(hypersphere_radius(3).unwrap(), (3.0 / PI).cbrt(), max_relative = 1e-14);
        assert_relative_eq!(hypersphere_radius(4).unwrap(), (16.0 / (PI * PI)).powf(0.25), max_relative = 1e-14);
        assert_relative_eq!(hypersphere_radius(2).unwrap(), 0.7979, epsilon = 1e-4);
        assert_relative_eq!(hypersphere_radius(3).unwrap(), 0.9847, epsilon = 1e-4);
        assert_relative_eq!(hypersphere_radius(4).unwrap(), std::f64::consts::FRAC_2_SQRT_PI, epsilon = 1e-14);
        for n in 1..=6 {
            let r = hypersphere_radius(n).unwrap();
            let volume = PI.powf(n as f64 / 2.0) * r.powi(n as i32) / gamma_half_plus_one(n);
            assert_relative_eq!(volume, 2f64.powi(n as i32 - 1), max_relative = 1e-12);
        }
        assert!(hypersphere_radius(0).is_err());
        assert!(hypersphere_radius(7).is_err());
    }

    #[test]
    fn indicator_examples() {
        let f = hypersphere_indicator(2).unwrap();
        assert_eq!(f(&[0.0, 0.0]), 1.0);
        assert_eq!(f(&[1.0, 1.0]), 0.0);
        assert_eq!(hypersphere_mean(2).unwrap(), 0.5);
    }

    #[test]
    fn monte_carlo_agrees_with_reference() {
        for n in 2..=4 {
            let f = hypersphere_indicator(n).unwrap();
            let mean = hypersphere_mean(n).unwrap();
            let mut rng = RandomSource::new(17, n as u64, 0).rng();
            let samples = 1_000_000;
            let mut hits = 0.0;
            let mut u = vec![0.0; n];
            for _ in 0..samples {
                u.iter_mut().for_each(|x| *x = rng.random());
                hits += f(&u);
            }
            let est = hits / samples as f64;
            let se = (mean * (1.0 - mean) / samples as f64).sqrt();
            assert!((est - mean).abs() <= 4.0 * se, "n={n}: {est} vs {mean}");
        }
    }
}
