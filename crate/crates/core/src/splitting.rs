//! Greedy refinement: online statistics for every tentative bisection of a
//! stratum, the variance reduction a bisection would bring, and the split
//! itself.

use crate::driver::{Stratification, StratumRecord};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, Side, SplitPlaneId};
use crate::scalar::Real;
use crate::statistics::StratumStats;
use crate::variance::inner;

/// Statistics of both halves of every candidate bisection of one stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct TentativeSplitTable<F> {
    planes: Vec<SplitPlaneId>,
    pairs: Vec<(StratumStats<F>, StratumStats<F>)>,
}

impl<F: Real> TentativeSplitTable<F> {
    pub fn new(geom: &Geometry<F>) -> Self {
        let planes = geom.enumerate_split_planes();
        let pairs = vec![(StratumStats::new(), StratumStats::new()); planes.len()];
        Self { planes, pairs }
    }

    pub fn planes(&self) -> &[SplitPlaneId] {
        &self.planes
    }

    /// `(minus, plus)` statistics, in plane order.
    pub fn pairs(&self) -> &[(StratumStats<F>, StratumStats<F>)] {
        &self.pairs
    }

    pub fn pair(&self, plane: SplitPlaneId) -> Option<&(StratumStats<F>, StratumStats<F>)> {
        self.planes.iter().position(|&p| p == plane).map(|i| &self.pairs[i])
    }

    pub fn record_sample(&mut self, geom: &Geometry<F>, point: &[F], value: F) -> Result<()> {
        if point.len() != geom.dim() {
            return Err(Error::DimensionMismatch { expected: geom.dim(), got: point.len() });
        }
        if !geom.contains(point) {
            return Err(Error::PointOutside);
        }
        let mut scratch = Vec::new();
        let mut sides = Vec::new();
        self.record_unchecked(geom, point, value, &mut scratch, &mut sides);
        Ok(())
    }

    pub(crate) fn record_unchecked(
        &mut self,
        geom: &Geometry<F>,
        point: &[F],
        value: F,
        scratch: &mut Vec<F>,
        sides: &mut Vec<Side>,
    ) {
        geom.sides_into(point, scratch, sides);
        for (pair, side) in self.pairs.iter_mut().zip(sides.iter()) {
            match side {
                Side::Minus => pair.0.update(value),
                Side::Plus => pair.1.update(value),
            }
        }
    }
}

pub fn record_sample<F: Real>(
    table: &mut TentativeSplitTable<F>,
    geom: &Geometry<F>,
    point: &[F],
    value: F,
) -> Result<()> {
    table.record_sample(geom, point, value)
}

/// Quantities of the current stratification shared by all candidate scores.
struct ScoreContext<'a, F> {
    p: &'a [F],
    sigma: &'a [F],
    alpha: F,
    ps: F,
}

impl<'a, F: Real> ScoreContext<'a, F> {
    fn new(p: &'a [F], sigma: &'a [F], alpha: F) -> Self {
        Self { p, sigma, alpha, ps: inner(p, sigma) }
    }

    /// `P sigma^2 / (alpha sigma + (1 - alpha) P)`, zero when `sigma = 0`.
    fn weighted(&self, s: F, ps: F) -> F {
        if s == F::zero() {
            F::zero()
        } else {
            ps * s * s / (self.alpha * s + (F::one() - self.alpha) * ps)
        }
    }

    fn score(&self, t: usize, s_minus: F, s_plus: F) -> F {
        let (alpha, ps) = (self.alpha, self.ps);
        let pt = self.p[t];
        let half = F::lit(0.5);
        let refined = ps - pt * self.sigma[t] + half * pt * (s_minus + s_plus);
        let own = pt * (self.weighted(self.sigma[t], ps) - half * (self.weighted(s_minus, refined) + self.weighted(s_plus, refined)));
        if alpha == F::zero() || ps == refined {
            return own;
        }
        // Remaining strata only change through the normalization <p, sigma>.
        let one_minus = F::one() - alpha;
        let mut cross = F::zero();
        for (s, (&p, &sig)) in self.p.iter().zip(self.sigma).enumerate() {
            if s == t || sig == F::zero() {
                continue;
            }
            let d_old = alpha * sig + one_minus * ps;
            let d_new = alpha * sig + one_minus * refined;
            cross += p * sig * sig * sig / (d_old * d_new);
        }
        own + alpha * (ps - refined) * cross
    }
}

/// `N (V(S) - V(S_[T]))` for splitting stratum `t` into halves with standard
/// deviations `sigma_minus` and `sigma_plus`. Zero-deviation strata contribute
/// nothing, which keeps the score finite at `alpha = 1`.
pub fn score_split<F: Real>(p: &[F], sigma: &[F], t: usize, sigma_minus: F, sigma_plus: F, alpha: F) -> Result<F> {
    if p.len() != sigma.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: sigma.len() });
    }
    if t >= p.len() {
        return Err(Error::InvalidParameter(format!("stratum index {t} out of range")));
    }
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::Domain { value: alpha.as_f64(), domain: "[0,1]" });
    }
    if !(sigma_minus >= F::zero() && sigma_plus >= F::zero()) || sigma.iter().any(|&s| !(s >= F::zero())) {
        return Err(Error::InvalidParameter("standard deviations must be non-negative".into()));
    }
    Ok(ScoreContext::new(p, sigma, alpha).score(t, sigma_minus, sigma_plus))
}

/// Proportional-allocation reduction `p_T (sigma_T^2 - (sigma_-^2 + sigma_+^2) / 2)`.
pub fn score_split_proportional<F: Real>(p_t: F, sigma_t: F, sigma_minus: F, sigma_plus: F) -> F {
    p_t * (sigma_t * sigma_t - (sigma_minus * sigma_minus + sigma_plus * sigma_plus) / F::lit(2.0))
}

/// Optimal-allocation reduction in terms of `Delta_T = (sigma_- + sigma_+)/2 - sigma_T`.
pub fn score_split_optimal<F: Real>(p: &[F], sigma: &[F], t: usize, sigma_minus: F, sigma_plus: F) -> F {
    let two = F::lit(2.0);
    let pt = p[t];
    let delta = (sigma_minus + sigma_plus) / two - sigma[t];
    let others = inner(p, sigma) - pt * sigma[t];
    -pt * delta * (pt * sigma[t] + two * others) - pt * pt * delta * (sigma_minus + sigma_plus) / two
}

/// A chosen bisection and its score in units of `N * variance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate<F> {
    pub stratum_id: u64,
    pub plane: SplitPlaneId,
    pub score: F,
}

/// Best positive-score bisection among strata holding at least `min_samples`
/// samples. Both halves must have seen a sample. Ties go to the smallest
/// `(stratum id, plane)`.
pub fn select_split<F: Real>(strat: &Stratification<F>, alpha: F, min_samples: u64) -> Option<SplitCandidate<F>> {
    let p: Vec<F> = strat.strata.iter().map(|s| s.p).collect();
    let sigma: Vec<F> = strat.strata.iter().map(|s| s.stats.std()).collect();
    let ctx = ScoreContext::new(&p, &sigma, alpha);
    let mut best: Option<SplitCandidate<F>> = None;
    for (t, rec) in strat.strata.iter().enumerate() {
        if rec.stats.count() < min_samples.max(2) {
            continue;
        }
        for (&plane, (minus, plus)) in rec.table.planes().iter().zip(rec.table.pairs()) {
            if minus.count() == 0 || plus.count() == 0 {
                continue;
            }
            let score = ctx.score(t, minus.std(), plus.std());
            if !(score > F::zero()) || !score.is_finite() {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => score > b.score || (score == b.score && (rec.id, plane) < (b.stratum_id, b.plane)),
            };
            if better {
                best = Some(SplitCandidate { stratum_id: rec.id, plane, score });
            }
        }
    }
    best
}

/// Replaces the candidate's stratum by its two halves and redistributes the
/// retained samples between them.
pub fn execute_split<F: Real>(strat: &mut Stratification<F>, candidate: &SplitCandidate<F>) -> Result<()> {
    let index = strat
        .strata
        .iter()
        .position(|s| s.id == candidate.stratum_id)
        .ok_or_else(|| Error::InvalidParameter(format!("no stratum with id {}", candidate.stratum_id)))?;
    let parent = strat.strata.swap_remove(index);
    let plane_index = parent
        .table
        .planes()
        .iter()
        .position(|&p| p == candidate.plane)
        .ok_or_else(|| Error::InvalidPlane(format!("{:?}", candidate.plane)))?;
    let (g_minus, g_plus) = parent.geometry.bisect(candidate.plane)?;
    let (mut pts_minus, mut vals_minus) = (Vec::new(), Vec::new());
    let (mut pts_plus, mut vals_plus) = (Vec::new(), Vec::new());
    let (mut scratch, mut sides) = (Vec::new(), Vec::new());
    for (point, value) in parent.points.into_iter().zip(parent.values) {
        parent.geometry.sides_into(&point, &mut scratch, &mut sides);
        if sides[plane_index] == Side::Minus {
            pts_minus.push(point);
            vals_minus.push(value);
        } else {
            pts_plus.push(point);
            vals_plus.push(value);
        }
    }
    let half = parent.p / F::lit(2.0);
    let (stats_minus, stats_plus) = parent.table.pairs()[plane_index];
    let id_minus = strat.allocate_id();
    let id_plus = strat.allocate_id();
    let mut minus = StratumRecord::from_samples(id_minus, g_minus, half, pts_minus, vals_minus);
    let mut plus = StratumRecord::from_samples(id_plus, g_plus, half, pts_plus, vals_plus);
    // Keep the online statistics accumulated before the split.
    minus.stats = stats_minus;
    plus.stats = stats_plus;
    strat.strata.push(minus);
    strat.strata.push(plus);
    strat.strata.sort_by_key(|s| s.id);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RandomSource;
    use crate::geometry::HyperRectangle;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    /// Brute-force reduction: the difference of the two variance constants.
    fn brute(p: &[f64], sigma: &[f64], t: usize, sm: f64, sp: f64, alpha: f64) -> f64 {
        let before = crate::variance::hybrid_constant_lenient(p, sigma, alpha);
        let mut p2 = p.to_vec();
        let mut s2 = sigma.to_vec();
        p2[t] /= 2.0;
        s2[t] = sm;
        p2.push(p[t] / 2.0);
        s2.push(sp);
        before - crate::variance::hybrid_constant_lenient(&p2, &s2, alpha)
    }

    #[test]
    fn step_examples() {
        assert_relative_eq!(score_split(&[1.0], &[0.5], 0, 0.0, 0.0, 0.0).unwrap(), 0.25);
        // The children variances (0, 2/9) quoted for an off-centre cut.
        let off = score_split_proportional(1.0, 0.5, 0.0, (2.0f64 / 9.0).sqrt());
        assert_relative_eq!(off, 0.25 - 1.0 / 9.0, max_relative = 1e-14);
        assert!(off < 0.25);
        for a in [0.0, 0.5, 1.0] {
            assert_eq!(score_split(&[0.5, 0.5], &[0.0, 1.0], 0, 0.0, 0.0, a).unwrap(), 0.0);
        }
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize, f64, f64, f64)> {
        (1usize..8).prop_flat_map(|k| {
            (
                prop::collection::vec(0.05f64..1.0, k),
                prop::collection::vec(0.0f64..3.0, k),
                0..k,
                0.0f64..3.0,
                0.0f64..3.0,
                0.0f64..=1.0,
            )
                .prop_map(|(w, s, t, a, b, alpha)| {
                    let total: f64 = w.iter().sum();
                    (w.iter().map(|x| x / total).collect(), s, t, a, b, alpha)
                })
        })
    }

    proptest! {
        #[test]
        fn general_score_matches_constant_difference((p, s, t, a, b, alpha) in instance()) {
            let got = score_split(&p, &s, t, a, b, alpha).unwrap();
            let want = brute(&p, &s, t, a, b, alpha);
            prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
        }

        #[test]
        fn specializations_agree((p, s, t, a, b, _alpha) in instance()) {
            let g0 = score_split(&p, &s, t, a, b, 0.0).unwrap();
            prop_assert!((g0 - score_split_proportional(p[t], s[t], a, b)).abs() <= 1e-10);
            let g1 = score_split(&p, &s, t, a, b, 1.0).unwrap();
            prop_assert!((g1 - score_split_optimal(&p, &s, t, a, b)).abs() <= 1e-10);
        }

        #[test]
        fn scores_scale_quadratically((p, s, t, a, b, alpha) in instance(), lambda in 0.1f64..10.0) {
            let base = score_split(&p, &s, t, a, b, alpha).unwrap();
            let scaled: Vec<f64> = s.iter().map(|x| x * lambda).collect();
            let got = score_split(&p, &scaled, t, a * lambda, b * lambda, alpha).unwrap();
            prop_assert!((got - lambda * lambda * base).abs() <= 1e-9 * (lambda * lambda * base).abs().max(1e-12));
        }
    }

    fn square_stratification(values: impl Fn(&[f64]) -> f64, n: usize, seed: u64) -> Stratification<f64> {
        let geom: Geometry<f64> = HyperRectangle::unit(2).into();
        let mut rng = RandomSource::new(seed, 0, 0).rng();
        let pts = geom.sample_uniform(&mut rng, n);
        let vals: Vec<f64> = pts.iter().map(|p| values(p)).collect();
        Stratification::from_samples(vec![geom], vec![pts], vec![vals]).unwrap()
    }

    #[test]
    fn record_sample_examples() {
        let geom: Geometry<f64> = HyperRectangle::unit(2).into();
        let mut table = TentativeSplitTable::new(&geom);
        table.record_sample(&geom, &[0.2, 0.9], 1.0).unwrap();
        assert_eq!(table.pairs()[0].0.count(), 1);
        assert_eq!(table.pairs()[0].1.count(), 0);
        assert_eq!(table.pairs()[1].0.count(), 0);
        assert_eq!(table.pairs()[1].1.count(), 1);
        let mut rng = RandomSource::new(1, 0, 0).rng();
        for _ in 0..99 {
            let p = [rng.random::<f64>(), rng.random::<f64>()];
            table.record_sample(&geom, &p, p[0] + p[1]).unwrap();
        }
        for (m, p) in table.pairs() {
            assert_eq!(m.count() + p.count(), 100);
        }
        let half: Geometry<f64> = HyperRectangle::new(vec![0.0, 0.0], vec![0.5, 1.0]).unwrap().into();
        let mut t = TentativeSplitTable::new(&half);
        assert!(matches!(t.record_sample(&half, &[0.7, 0.1], 1.0), Err(Error::PointOutside)));
    }

    #[test]
    fn table_matches_batch_recomputation() {
        let strat = square_stratification(|p| (3.0 * p[0]).sin() + p[1] * p[1], 500, 4);
        let rec = &strat.strata[0];
        for (k, &plane) in rec.table.planes().iter().enumerate() {
            let (minus, plus) = rec.geometry.bisect(plane).unwrap();
            let pick = |g: &Geometry<f64>| {
                let v: Vec<f64> = rec.points.iter().zip(&rec.values).filter(|(p, _)| g.contains(p)).map(|(_, &v)| v).collect();
                let n = v.len() as f64;
                let m = v.iter().sum::<f64>() / n;
                (v.len() as u64, m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
            };
            for (stats, g) in [(&rec.table.pairs()[k].0, &minus), (&rec.table.pairs()[k].1, &plus)] {
                let (n, m, var) = pick(g);
                assert_eq!(stats.count(), n);
                assert!((stats.mean() - m).abs() < 1e-9);
                assert!((stats.variance() - var).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn select_split_examples() {
        let strat = square_stratification(|p| p[0], 10, 2);
        assert!(select_split(&strat, 0.5, 20).is_none());

        // Exact 1D step strata: each half is constant.
        let left: Geometry<f64> = HyperRectangle::new(vec![0.0], vec![0.5]).unwrap().into();
        let right: Geometry<f64> = HyperRectangle::new(vec![0.5], vec![1.0]).unwrap().into();
        let mut rng = RandomSource::new(3, 0, 0).rng();
        let pl = left.sample_uniform(&mut rng, 50);
        let pr = right.sample_uniform(&mut rng, 50);
        let strat = Stratification::from_samples(vec![left, right], vec![pl, pr], vec![vec![0.0; 50], vec![1.0; 50]]).unwrap();
        assert!(select_split(&strat, 0.0, 4).is_none());
        assert!(select_split(&strat, 0.9, 4).is_none());

        // Quarter disc: a single stratum splits along an axis.
        let r2 = 2.0 / std::f64::consts::PI;
        let strat = square_stratification(|p| if p[0] * p[0] + p[1] * p[1] <= r2 { 1.0 } else { 0.0 }, 4000, 9);
        let c = select_split(&strat, 0.0, 4).unwrap();
        assert!(matches!(c.plane, SplitPlaneId::Axis(_)));
        assert!(c.score > 0.0);
    }

    #[test]
    fn execute_split_redistributes() {
        let mut strat = square_stratification(|p| if p[1] > 0.3 { 2.0 } else { p[0] }, 400, 8);
        let c = select_split(&strat, 0.3, 4).unwrap();
        let parent_count = strat.strata[0].stats.count();
        execute_split(&mut strat, &c).unwrap();
        assert_eq!(strat.strata.len(), 2);
        assert_eq!(strat.strata.iter().map(|s| s.stats.count()).sum::<u64>(), parent_count);
        assert_eq!(strat.strata.iter().map(|s| s.p).sum::<f64>(), 1.0);
        for rec in &strat.strata {
            assert_eq!(rec.stats.count(), rec.values.len() as u64);
            assert!(rec.points.iter().all(|p| rec.geometry.contains(p)));
            let batch = StratumStats::from_values(rec.values.iter().copied());
            assert!((batch.mean() - rec.stats.mean()).abs() < 1e-9);
            assert!((batch.variance() - rec.stats.variance()).abs() < 1e-9);
            for (m, p) in rec.table.pairs() {
                assert_eq!(m.count() + p.count(), rec.stats.count());
            }
        }
        let bogus = SplitCandidate { stratum_id: 999, plane: SplitPlaneId::Axis(0), score: 1.0 };
        assert!(execute_split(&mut strat, &bogus).is_err());
    }
}
