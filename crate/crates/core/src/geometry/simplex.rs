use rand::Rng;

use super::linalg::{determinant, invert};
use super::{Side, SplitPlaneId};
use crate::domain::unit_uniform;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Barycentric coordinates below `-INSIDE_TOLERANCE` mark a point as outside.
pub(crate) const INSIDE_TOLERANCE: f64 = 1e-12;
const SIDE_TOLERANCE: f64 = 1e-9;

/// An `n`-simplex given by `n + 1` vertices, with the inverse of the affine
/// system `[v_0 .. v_n; 1 .. 1]` cached for barycentric transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex<F> {
    dim: usize,
    vertices: Vec<Vec<F>>,
    inverse: Vec<F>,
    volume: F,
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// `|det(v_1 - v_0, ..., v_n - v_0)| / n!`
pub fn simplex_volume<F: Real>(vertices: &[Vec<F>]) -> Result<F> {
    let n = vertices.len().checked_sub(1).ok_or(Error::EmptySamples)?;
    if vertices.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: vertices[0].len() });
    }
    let mut m = Vec::with_capacity(n * n);
    for v in &vertices[1..] {
        m.extend(v.iter().zip(&vertices[0]).map(|(&a, &b)| a - b));
    }
    Ok(determinant(&m, n).abs() / F::from_count(factorial(n)))
}

impl<F: Real> Simplex<F> {
    pub fn new(vertices: Vec<Vec<F>>) -> Result<Self> {
        let volume = simplex_volume(&vertices)?;
        Self::with_volume(vertices, volume)
    }

    pub(crate) fn with_volume(vertices: Vec<Vec<F>>, volume: F) -> Result<Self> {
        let dim = vertices.len() - 1;
        if dim == 0 || dim > super::SIMPLEX_MAX_DIM {
            return Err(Error::DimensionOutOfRange { n: dim, max: super::SIMPLEX_MAX_DIM });
        }
        let m = dim + 1;
        // Column k of the affine system holds vertex k with a trailing 1.
        let mut a = vec![F::zero(); m * m];
        for (k, v) in vertices.iter().enumerate() {
            for (r, &x) in v.iter().enumerate() {
                a[r * m + k] = x;
            }
            a[dim * m + k] = F::one();
        }
        let inverse = invert(&a, m)?;
        if !(volume > F::zero()) {
            return Err(Error::DegenerateGeometry("simplex has zero volume".into()));
        }
        Ok(Self { dim, vertices, inverse, volume })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<F>] {
        &self.vertices
    }

    pub fn measure(&self) -> F {
        self.volume
    }

    pub fn centroid(&self) -> Vec<F> {
        let w = F::one() / F::from_count(self.dim as u64 + 1);
        (0..self.dim).map(|i| self.vertices.iter().map(|v| v[i]).sum::<F>() * w).collect()
    }

    /// Barycentric weights of `p`, summing to one.
    pub fn barycentric(&self, p: &[F]) -> Result<Vec<F>> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        let mut out = Vec::with_capacity(self.dim + 1);
        self.barycentric_into(p, &mut out);
        Ok(out)
    }

    pub(crate) fn barycentric_into(&self, p: &[F], out: &mut Vec<F>) {
        let m = self.dim + 1;
        out.clear();
        for r in 0..m {
            let row = &self.inverse[r * m..(r + 1) * m];
            let mut s = row[self.dim];
            for (c, &x) in p.iter().enumerate() {
                s += row[c] * x;
            }
            out.push(s);
        }
    }

    pub fn contains(&self, p: &[F]) -> bool {
        if p.len() != self.dim {
            return false;
        }
        let mut lam = Vec::with_capacity(self.dim + 1);
        self.barycentric_into(p, &mut lam);
        let tol = F::lit(INSIDE_TOLERANCE);
        lam.iter().all(|&l| l >= -tol)
    }

    /// Convex combination of the vertices with weights from normalized
    /// exponential variates, which is uniform on the simplex.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<F>) {
        let mut weights = [F::zero(); 16];
        let mut total = F::zero();
        for w in weights.iter_mut().take(self.dim + 1) {
            let u: F = unit_uniform(rng);
            *w = -(-u).ln_1p();
            total += *w;
        }
        out.clear();
        out.resize(self.dim, F::zero());
        for (w, v) in weights.iter().zip(&self.vertices) {
            let w = *w / total;
            for (o, &x) in out.iter_mut().zip(v) {
                *o += w * x;
            }
        }
        for o in out.iter_mut() {
            *o = o.max(F::zero()).min(F::one());
        }
    }

    pub fn split_planes(&self) -> Vec<SplitPlaneId> {
        let m = self.dim + 1;
        let mut planes = Vec::with_capacity(m * self.dim / 2);
        for i in 0..m {
            for k in i + 1..m {
                planes.push(SplitPlaneId::Edge(i, k));
            }
        }
        planes
    }

    fn edge_of(&self, plane: SplitPlaneId) -> Result<(usize, usize)> {
        match plane {
            SplitPlaneId::Edge(i, k) if i < k && k <= self.dim => Ok((i, k)),
            other => Err(Error::InvalidPlane(format!("{other:?} for a {}-simplex", self.dim))),
        }
    }

    /// Splits through the midpoint of edge `(i, k)`. The minus child keeps
    /// vertex `i`, the plus child keeps vertex `k`.
    pub fn bisect(&self, plane: SplitPlaneId) -> Result<(Self, Self)> {
        let (i, k) = self.edge_of(plane)?;
        let two = F::lit(2.0);
        let mid: Vec<F> = self.vertices[i].iter().zip(&self.vertices[k]).map(|(&a, &b)| (a + b) / two).collect();
        let half = self.volume / two;
        let mut minus = self.vertices.clone();
        minus[k] = mid.clone();
        let mut plus = self.vertices.clone();
        plus[i] = mid;
        Ok((Self::with_volume(minus, half)?, Self::with_volume(plus, half)?))
    }

    pub fn side_of(&self, plane: SplitPlaneId, p: &[F]) -> Result<Side> {
        let (i, k) = self.edge_of(plane)?;
        let lam = self.barycentric(p)?;
        let tol = F::lit(SIDE_TOLERANCE);
        if lam.iter().any(|&l| l < -tol) {
            return Err(Error::PointOutside);
        }
        Ok(side_from_barycentric(&lam, i, k))
    }
}

#[inline]
pub(crate) fn side_from_barycentric<F: Real>(lam: &[F], i: usize, k: usize) -> Side {
    if lam[i] > lam[k] {
        Side::Minus
    } else {
        Side::Plus
    }
}
