//! Stratum shapes: axis-aligned boxes and simplices of the unit cube.

mod kuhn;
mod linalg;
mod rect;
mod simplex;

pub use kuhn::{
    kuhn_cell, kuhn_decomposition, orientation_count, orientation_from_index, permutations,
    select_initial_tessellation, InitialTessellation,
};
pub use rect::HyperRectangle;
pub use simplex::{factorial, simplex_volume, Simplex};

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest dimension supported by simplex stratifications (`8!` initial strata).
pub const SIMPLEX_MAX_DIM: usize = 8;
/// Largest dimension supported by box stratifications.
pub const RECT_MAX_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    HyperRectangle,
    Simplex,
}

impl GeometryKind {
    pub fn max_dim(self) -> usize {
        match self {
            Self::HyperRectangle => RECT_MAX_DIM,
            Self::Simplex => SIMPLEX_MAX_DIM,
        }
    }
}

/// Candidate bisection of a stratum: an axis for boxes, an edge `(i, k)`
/// with `i < k` for simplices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitPlaneId {
    Axis(usize),
    Edge(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry<F> {
    Rect(HyperRectangle<F>),
    Simplex(Simplex<F>),
}

impl<F: Real> From<HyperRectangle<F>> for Geometry<F> {
    fn from(r: HyperRectangle<F>) -> Self {
        Self::Rect(r)
    }
}

impl<F: Real> From<Simplex<F>> for Geometry<F> {
    fn from(s: Simplex<F>) -> Self {
        Self::Simplex(s)
    }
}

impl<F: Real> Geometry<F> {
    pub fn kind(&self) -> GeometryKind {
        match self {
            Self::Rect(_) => GeometryKind::HyperRectangle,
            Self::Simplex(_) => GeometryKind::Simplex,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Rect(r) => r.dim(),
            Self::Simplex(s) => s.dim(),
        }
    }

    pub fn measure(&self) -> F {
        match self {
            Self::Rect(r) => r.measure(),
            Self::Simplex(s) => s.measure(),
        }
    }

    pub fn contains(&self, p: &[F]) -> bool {
        match self {
            Self::Rect(r) => r.contains(p),
            Self::Simplex(s) => s.contains(p),
        }
    }

    /// `k` independent uniform points in the stratum.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> Vec<Vec<F>> {
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let mut p = Vec::with_capacity(self.dim());
            match self {
                Self::Rect(r) => r.sample_into(rng, &mut p),
                Self::Simplex(s) => s.sample_into(rng, &mut p),
            }
            out.push(p);
        }
        out
    }

    /// All bisection planes in a fixed order: `n` for boxes, `n(n+1)/2` for simplices.
    pub fn enumerate_split_planes(&self) -> Vec<SplitPlaneId> {
        match self {
            Self::Rect(r) => r.split_planes(),
            Self::Simplex(s) => s.split_planes(),
        }
    }

    pub fn bisect(&self, plane: SplitPlaneId) -> Result<(Self, Self)> {
        match self {
            Self::Rect(r) => r.bisect(plane).map(|(a, b)| (a.into(), b.into())),
            Self::Simplex(s) => s.bisect(plane).map(|(a, b)| (a.into(), b.into())),
        }
    }

    pub fn side_of(&self, plane: SplitPlaneId, p: &[F]) -> Result<Side> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        match self {
            Self::Rect(r) => r.side_of(plane, p),
            Self::Simplex(s) => s.side_of(plane, p),
        }
    }

    /// Sides of `p` for every plane of [`Self::enumerate_split_planes`], in
    /// the same order. `scratch` avoids reallocating barycentric buffers.
    pub(crate) fn sides_into(&self, p: &[F], scratch: &mut Vec<F>, out: &mut Vec<Side>) {
        out.clear();
        match self {
            Self::Rect(r) => out.extend((0..r.dim()).map(|j| r.side_unchecked(j, p))),
            Self::Simplex(s) => {
                s.barycentric_into(p, scratch);
                let m = s.dim() + 1;
                for i in 0..m {
                    for k in i + 1..m {
                        out.push(simplex::side_from_barycentric(scratch, i, k));
                    }
                }
            }
        }
    }
}

pub fn measure<F: Real>(geom: &Geometry<F>) -> F {
    geom.measure()
}

pub fn contains<F: Real>(geom: &Geometry<F>, p: &[F]) -> bool {
    geom.contains(p)
}

pub fn enumerate_split_planes<F: Real>(geom: &Geometry<F>) -> Vec<SplitPlaneId> {
    geom.enumerate_split_planes()
}

pub fn bisect<F: Real>(geom: &Geometry<F>, plane: SplitPlaneId) -> Result<(Geometry<F>, Geometry<F>)> {
    geom.bisect(plane)
}

pub fn side_of<F: Real>(geom: &Geometry<F>, plane: SplitPlaneId, p: &[F]) -> Result<Side> {
    geom.side_of(plane, p)
}

pub fn barycentric<F: Real>(simplex: &Simplex<F>, p: &[F]) -> Result<Vec<F>> {
    simplex.barycentric(p)
}

pub fn sample_uniform<F: Real, R: Rng + ?Sized>(geom: &Geometry<F>, rng: &mut R, k: usize) -> Vec<Vec<F>> {
    geom.sample_uniform(rng, k)
}
