//! Integrands whose mean and variance are known in closed form on any box or
//! simplex, for checking estimators stratum by stratum.

use super::{hypersphere_radius, ProblemSpec};
use crate::domain::ParameterMap;
use crate::error::{Error, Result};
use crate::geometry::Geometry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMoments {
    pub mean: f64,
    pub variance: f64,
}

impl ExactMoments {
    fn indicator(q: f64) -> Self {
        let q = q.clamp(0.0, 1.0);
        Self { mean: q, variance: q * (1.0 - q) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixture {
    /// `y_1 + ... + y_n`
    Linear { dim: usize },
    /// `1{y_1 >= threshold}`
    Step { dim: usize, threshold: f64 },
    /// `1{y_2 >= y_1}`
    DiagonalStep,
    /// Two-dimensional ball indicator with the radius of `hypersphere-2`.
    QuarterDisc,
}

impl Fixture {
    pub fn dim(&self) -> usize {
        match *self {
            Self::Linear { dim } | Self::Step { dim, .. } => dim,
            Self::DiagonalStep | Self::QuarterDisc => 2,
        }
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        match *self {
            Self::Linear { .. } => y.iter().sum(),
            Self::Step { threshold, .. } => flag(y[0] >= threshold),
            Self::DiagonalStep => flag(y[1] >= y[0]),
            Self::QuarterDisc => {
                let r = quarter_disc_radius();
                flag(y[0] * y[0] + y[1] * y[1] <= r * r)
            }
        }
    }

    pub fn id(&self) -> String {
        match *self {
            Self::Linear { dim } => format!("linear-{dim}"),
            Self::Step { dim: 1, threshold: 0.5 } => "step-1d".into(),
            Self::Step { dim, threshold } => format!("step-{dim}-{threshold}"),
            Self::DiagonalStep => "diagonal-step".into(),
            Self::QuarterDisc => "quarter-disc".into(),
        }
    }

    pub fn problem(&self) -> ProblemSpec {
        let this = *self;
        let description = match self {
            Self::Linear { .. } => "sum of coordinates",
            Self::Step { .. } => "step in the first coordinate",
            Self::DiagonalStep => "step across the diagonal",
            Self::QuarterDisc => "quarter disc indicator",
        };
        let mean = self.exact_moments(&Geometry::Rect(crate::geometry::HyperRectangle::unit(self.dim())));
        let spec = ProblemSpec::new(self.id(), ParameterMap::unit(self.dim()), description, "1", move |u| {
            Ok(this.value(u))
        });
        match mean {
            Ok(m) => spec.with_reference_mean(m.mean),
            Err(_) => spec,
        }
    }

    /// Mean and variance of the integrand under the uniform law on `geom`.
    pub fn exact_moments(&self, geom: &Geometry<f64>) -> Result<ExactMoments> {
        if geom.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: geom.dim() });
        }
        match *self {
            Self::Linear { .. } => Ok(linear_moments(geom)),
            Self::Step { threshold, .. } => step_fraction(geom, threshold).map(ExactMoments::indicator),
            Self::DiagonalStep => diagonal_step_fraction(geom).map(ExactMoments::indicator),
            Self::QuarterDisc => match geom {
                Geometry::Rect(r) => {
                    let area = quarter_disc_area(quarter_disc_radius(), r.lower(), r.upper());
                    Ok(ExactMoments::indicator(area / r.measure()))
                }
                Geometry::Simplex(_) => Err(Error::Precondition("quarter disc moments need a box".into())),
            },
        }
    }
}

fn quarter_disc_radius() -> f64 {
    hypersphere_radius(2).expect("dimension 2 is supported")
}

fn linear_moments(geom: &Geometry<f64>) -> ExactMoments {
    match geom {
        Geometry::Rect(r) => {
            let mean = r.lower().iter().zip(r.upper()).map(|(l, u)| 0.5 * (l + u)).sum();
            let variance = (0..r.dim()).map(|k| r.width(k).powi(2) / 12.0).sum();
            ExactMoments { mean, variance }
        }
        Geometry::Simplex(s) => {
            // The sum is affine, so it equals sum_j lambda_j s_j with s_j the
            // coordinate sum of vertex j; Dirichlet(1,..,1) weights give
            // E[lambda_i lambda_j] = (1 + delta_ij) / ((n+1)(n+2)).
            let sums: Vec<f64> = s.vertices().iter().map(|v| v.iter().sum()).collect();
            let m = sums.len() as f64;
            let mean = sums.iter().sum::<f64>() / m;
            let total: f64 = sums.iter().sum();
            let squares: f64 = sums.iter().map(|x| x * x).sum();
            let second = (total * total + squares) / (m * (m + 1.0));
            ExactMoments { mean, variance: (second - mean * mean).max(0.0) }
        }
    }
}

/// Fraction of `geom` with first coordinate at least `threshold`.
pub fn step_fraction(geom: &Geometry<f64>, threshold: f64) -> Result<f64> {
    match geom {
        Geometry::Rect(r) => {
            let (l, u) = (r.lower()[0], r.upper()[0]);
            Ok(((u - threshold.max(l)) / (u - l)).clamp(0.0, 1.0))
        }
        Geometry::Simplex(s) if s.dim() == 1 => {
            let (a, b) = (s.vertices()[0][0], s.vertices()[1][0]);
            let (l, u) = (a.min(b), a.max(b));
            Ok(((u - threshold.max(l)) / (u - l)).clamp(0.0, 1.0))
        }
        Geometry::Simplex(s) if s.dim() == 2 => {
            let tri = triangle(s.vertices());
            Ok(polygon_area(&clip_polygon(&tri, [1.0, 0.0], -threshold)) / polygon_area(&tri))
        }
        _ => Err(Error::Precondition("step moments on simplices need dimension 1 or 2".into())),
    }
}

/// Fraction of the planar region `geom` with `y_2 >= y_1`.
pub fn diagonal_step_fraction(geom: &Geometry<f64>) -> Result<f64> {
    let poly = match geom {
        Geometry::Rect(r) if r.dim() == 2 => {
            let (l, u) = (r.lower(), r.upper());
            vec![[l[0], l[1]], [u[0], l[1]], [u[0], u[1]], [l[0], u[1]]]
        }
        Geometry::Simplex(s) if s.dim() == 2 => triangle(s.vertices()),
        _ => return Err(Error::DimensionMismatch { expected: 2, got: geom.dim() }),
    };
    Ok(polygon_area(&clip_polygon(&poly, [-1.0, 1.0], 0.0)) / polygon_area(&poly))
}

fn triangle(v: &[Vec<f64>]) -> Vec<[f64; 2]> {
    v.iter().map(|p| [p[0], p[1]]).collect()
}

/// Part of a convex polygon where `normal . x + offset >= 0`.
pub fn clip_polygon(poly: &[[f64; 2]], normal: [f64; 2], offset: f64) -> Vec<[f64; 2]> {
    let side = |p: &[f64; 2]| normal[0] * p[0] + normal[1] * p[1] + offset;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (i, cur) in poly.iter().enumerate() {
        let prev = &poly[(i + poly.len() - 1) % poly.len()];
        let (sc, sp) = (side(cur), side(prev));
        if (sc >= 0.0) != (sp >= 0.0) {
            let t = sp / (sp - sc);
            out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
        }
        if sc >= 0.0 {
            out.push(*cur);
        }
    }
    out
}

/// Shoelace area.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let twice: f64 =
        (0..n).map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1]).sum();
    0.5 * twice.abs()
}

/// Area of `{x^2 + y^2 <= r^2}` inside the box `[lower, upper]` of the
/// positive quadrant.
pub fn quarter_disc_area(r: f64, lower: &[f64], upper: &[f64]) -> f64 {
    let (a, b, c, d) = (lower[0].max(0.0), upper[0], lower[1].max(0.0), upper[1]);
    if c >= r || a >= r || b <= a || d <= c {
        return 0.0;
    }
    // Integral of sqrt(r^2 - t^2) from 0 to x.
    let g = |x: f64| {
        let x = x.min(r);
        0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
    };
    let x_top = (r * r - d * d).max(0.0).sqrt();
    let x_bottom = (r * r - c * c).sqrt();
    // Full height up to x_top, then the arc down to the bottom edge.
    let full_end = b.min(x_top).max(a);
    let arc_end = b.min(x_bottom).max(full_end);
    (full_end - a) * (d - c) + (g(arc_end) - g(full_end)) - c * (arc_end - full_end)
}
