use rand::Rng;

use super::{Side, SplitPlaneId};
use crate::domain::unit_uniform;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned box `[lower, upper)` inside the unit cube. Faces lying on the
/// cube's upper boundary are closed.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperRectangle<F> {
    lower: Vec<F>,
    upper: Vec<F>,
}

impl<F: Real> HyperRectangle<F> {
    pub fn new(lower: Vec<F>, upper: Vec<F>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.is_empty() {
            return Err(Error::DegenerateGeometry("zero-dimensional box".into()));
        }
        for (&l, &u) in lower.iter().zip(&upper) {
            if !(l >= F::zero() && u <= F::one() && l < u) {
                return Err(Error::DegenerateGeometry(format!("invalid extent [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(n: usize) -> Self {
        Self { lower: vec![F::zero(); n], upper: vec![F::one(); n] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[F] {
        &self.lower
    }

    pub fn upper(&self) -> &[F] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> F {
        self.upper[axis] - self.lower[axis]
    }

    pub fn midpoint(&self, axis: usize) -> F {
        (self.lower[axis] + self.upper[axis]) / F::lit(2.0)
    }

    pub fn measure(&self) -> F {
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| u - l).fold(F::one(), |a, w| a * w)
    }

    pub fn contains(&self, p: &[F]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&x, (&l, &u))| {
                x >= l && (x < u || (u == F::one() && x <= u))
            })
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<F>) {
        out.clear();
        for (&l, &u) in self.lower.iter().zip(&self.upper) {
            let w = u - l;
            let mut x = l + w * unit_uniform::<F, _>(rng);
            if x >= u {
                x = u - w * F::epsilon();
            }
            out.push(x);
        }
    }

    pub fn split_planes(&self) -> Vec<SplitPlaneId> {
        (0..self.dim()).map(SplitPlaneId::Axis).collect()
    }

    fn axis_of(&self, plane: SplitPlaneId) -> Result<usize> {
        match plane {
            SplitPlaneId::Axis(j) if j < self.dim() => Ok(j),
            other => Err(Error::InvalidPlane(format!("{other:?} for a {}-dimensional box", self.dim()))),
        }
    }

    pub fn bisect(&self, plane: SplitPlaneId) -> Result<(Self, Self)> {
        let j = self.axis_of(plane)?;
        let mid = self.midpoint(j);
        let mut minus = self.clone();
        let mut plus = self.clone();
        minus.upper[j] = mid;
        plus.lower[j] = mid;
        Ok((minus, plus))
    }

    /// Side of the bisection plane; points on the plane go to `Plus`.
    pub fn side_of(&self, plane: SplitPlaneId, p: &[F]) -> Result<Side> {
        let j = self.axis_of(plane)?;
        if !self.contains(p) {
            return Err(Error::PointOutside);
        }
        Ok(self.side_unchecked(j, p))
    }

    #[inline]
    pub(crate) fn side_unchecked(&self, axis: usize, p: &[F]) -> Side {
        if p[axis] < self.midpoint(axis) {
            Side::Minus
        } else {
            Side::Plus
        }
    }
}
