//! Kuhn's triangulation of the unit cube into `n!` congruent simplices, and
//! the choice among its reflected variants.

use super::simplex::{factorial, Simplex};
use super::SIMPLEX_MAX_DIM;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statistics::StratumStats;
use crate::variance::hybrid_constant_lenient;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(factorial(n) as usize);
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push(perm.clone());
        // Next lexicographic permutation.
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("successor exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

/// Number of distinct reflected tessellations, `2^(n-1)`. Reflecting every
/// axis maps a Kuhn tessellation onto itself, so the last bit is fixed.
pub fn orientation_count(n: usize) -> usize {
    1usize << n.saturating_sub(1)
}

/// Reflection bits for orientation `index`; bit `i` flips coordinate `i`.
pub fn orientation_from_index(n: usize, index: usize) -> Vec<bool> {
    (0..n).map(|i| i + 1 < n && (index >> i) & 1 == 1).collect()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > SIMPLEX_MAX_DIM {
        return Err(Error::DimensionOutOfRange { n, max: SIMPLEX_MAX_DIM });
    }
    Ok(())
}

/// The `n!` simplices of the tessellation, ordered like [`permutations`].
/// Simplex `pi` walks from the reflected origin corner along the axes
/// `pi[0], pi[1], ...`.
pub fn kuhn_decomposition<F: Real>(n: usize, orientation: &[bool]) -> Result<Vec<Simplex<F>>> {
    check_dim(n)?;
    if orientation.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: orientation.len() });
    }
    let volume = F::one() / F::from_count(factorial(n));
    permutations(n)
        .into_iter()
        .map(|perm| {
            let mut v: Vec<F> = orientation.iter().map(|&b| if b { F::one() } else { F::zero() }).collect();
            let mut vertices = Vec::with_capacity(n + 1);
            vertices.push(v.clone());
            for &axis in &perm {
                v[axis] = if orientation[axis] { F::zero() } else { F::one() };
                vertices.push(v.clone());
            }
            Simplex::with_volume(vertices, volume)
        })
        .collect()
}

/// Index of the tessellation simplex holding `p`: order the reflected
/// coordinates decreasingly (ties by axis) and rank that permutation.
pub fn kuhn_cell<F: Real>(p: &[F], orientation: &[bool]) -> usize {
    let n = p.len();
    let mut buf = [(F::zero(), 0usize); SIMPLEX_MAX_DIM];
    let keys = &mut buf[..n];
    for (i, key) in keys.iter_mut().enumerate() {
        let x = if orientation[i] { F::one() - p[i] } else { p[i] };
        *key = (x, i);
    }
    keys.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    // Lehmer code rank.
    let mut rank = 0usize;
    for j in 0..n {
        let smaller = keys[j + 1..].iter().filter(|k| k.1 < keys[j].1).count();
        rank += smaller * factorial(n - 1 - j) as usize;
    }
    rank
}

/// The chosen starting stratification together with the statistics of the
/// initial samples sorted into it.
#[derive(Debug, Clone)]
pub struct InitialTessellation<F> {
    pub orientation_index: usize,
    pub orientation: Vec<bool>,
    pub simplices: Vec<Simplex<F>>,
    pub stats: Vec<StratumStats<F>>,
    /// Stratum index of every input sample.
    pub assignment: Vec<usize>,
    /// Empirical estimator variance of every candidate, by orientation index.
    pub scores: Vec<F>,
}

/// Picks the orientation whose tessellation gives the smallest empirical
/// estimator variance on the given samples; ties go to the lowest index.
pub fn select_initial_tessellation<F: Real>(
    n: usize,
    points: &[Vec<F>],
    values: &[F],
    alpha: F,
) -> Result<InitialTessellation<F>> {
    check_dim(n)?;
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    if points.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: values.len() });
    }
    if let Some(bad) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    let cells = factorial(n) as usize;
    let p = vec![F::one() / F::from_count(cells as u64); cells];
    let nf = F::from_count(points.len() as u64);

    let evaluate = |orientation: &[bool]| {
        let mut stats = vec![StratumStats::new(); cells];
        let assignment: Vec<usize> = points
            .iter()
            .zip(values)
            .map(|(pt, &v)| {
                let c = kuhn_cell(pt, orientation);
                stats[c].update(v);
                c
            })
            .collect();
        let sigma: Vec<F> = stats.iter().map(StratumStats::std).collect();
        let score = hybrid_constant_lenient(&p, &sigma, alpha) / nf;
        (score, stats, assignment)
    };

    let mut scores = Vec::with_capacity(orientation_count(n));
    let mut best: Option<(usize, Vec<StratumStats<F>>, Vec<usize>)> = None;
    let mut best_score = F::infinity();
    for index in 0..orientation_count(n) {
        let (score, stats, assignment) = evaluate(&orientation_from_index(n, index));
        scores.push(score);
        if best.is_none() || score < best_score {
            best_score = score;
            best = Some((index, stats, assignment));
        }
    }
    let (orientation_index, stats, assignment) = best.expect("at least one orientation");
    let orientation = orientation_from_index(n, orientation_index);
    let simplices = kuhn_decomposition(n, &orientation)?;
    Ok(InitialTessellation { orientation_index, orientation, simplices, stats, assignment, scores })
}
