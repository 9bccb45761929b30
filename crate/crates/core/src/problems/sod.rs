//! Exact solution of the one-dimensional Euler Riemann problem, used for a
//! shock tube with random densities and membrane position.

use super::ProblemSpec;
use crate::domain::{MarginalDistribution, ParameterMap};
use crate::error::{Error, Result};

pub const GAMMA: f64 = 1.4;
const TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100;

/// Primitive state `(density, velocity, pressure)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl RiemannState {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }

    fn sound_speed(&self) -> f64 {
        (GAMMA * self.p / self.rho).sqrt()
    }
}

/// Pressure function of one side and its derivative.
fn side_function(p: f64, s: &RiemannState) -> (f64, f64) {
    let c = s.sound_speed();
    if p > s.p {
        let a = 2.0 / ((GAMMA + 1.0) * s.rho);
        let b = (GAMMA - 1.0) / (GAMMA + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (b + p)))
    } else {
        let ratio = p / s.p;
        let e = (GAMMA - 1.0) / (2.0 * GAMMA);
        (2.0 * c / (GAMMA - 1.0) * (ratio.powf(e) - 1.0), ratio.powf(-(GAMMA + 1.0) / (2.0 * GAMMA)) / (s.rho * c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub left: RiemannState,
    pub right: RiemannState,
    pub p_star: f64,
    pub u_star: f64,
    pub iterations: usize,
}

impl RiemannSolution {
    /// Star-region pressure by Newton iteration on the pressure function,
    /// kept positive and started from the two-rarefaction estimate.
    pub fn solve(left: RiemannState, right: RiemannState) -> Result<Self> {
        if !(left.rho > 0.0 && right.rho > 0.0 && left.p > 0.0 && right.p > 0.0) {
            return Err(Error::InvalidParameter("densities and pressures must be positive".into()));
        }
        let (cl, cr) = (left.sound_speed(), right.sound_speed());
        let du = right.u - left.u;
        if 2.0 * (cl + cr) / (GAMMA - 1.0) <= du {
            return Err(Error::InvalidParameter("initial data generate vacuum".into()));
        }
        let e = (GAMMA - 1.0) / (2.0 * GAMMA);
        let guess = ((cl + cr - 0.5 * (GAMMA - 1.0) * du) / (cl / left.p.powf(e) + cr / right.p.powf(e))).powf(1.0 / e);
        let mut p = guess.max(TOLERANCE);
        for iteration in 1..=MAX_ITERATIONS {
            let (fl, dl) = side_function(p, &left);
            let (fr, dr) = side_function(p, &right);
            let mut next = p - (fl + fr + du) / (dl + dr);
            if next <= 0.0 {
                next = 0.5 * p;
            }
            let change = 2.0 * (next - p).abs() / (next + p);
            p = next;
            if change < TOLERANCE {
                let (fl, _) = side_function(p, &left);
                let (fr, _) = side_function(p, &right);
                let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
                return Ok(Self { left, right, p_star: p, u_star, iterations: iteration });
            }
        }
        Err(Error::NoConvergence(format!("star pressure after {MAX_ITERATIONS} Newton steps")))
    }

    /// Residual of the pressure equation at the computed star pressure.
    pub fn residual(&self) -> f64 {
        side_function(self.p_star, &self.left).0 + side_function(self.p_star, &self.right).0 + self.right.u - self.left.u
    }

    fn star_density(&self, s: &RiemannState) -> f64 {
        let ratio = self.p_star / s.p;
        if ratio > 1.0 {
            let g = (GAMMA - 1.0) / (GAMMA + 1.0);
            s.rho * (ratio + g) / (g * ratio + 1.0)
        } else {
            s.rho * ratio.powf(1.0 / GAMMA)
        }
    }

    pub fn star_density_left(&self) -> f64 {
        self.star_density(&self.left)
    }

    pub fn star_density_right(&self) -> f64 {
        self.star_density(&self.right)
    }

    /// Speed of the right-moving shock, if the right wave is one.
    pub fn right_shock_speed(&self) -> Option<f64> {
        let r = &self.right;
        (self.p_star > r.p).then(|| {
            let ratio = self.p_star / r.p;
            r.u + r.sound_speed() * ((GAMMA + 1.0) / (2.0 * GAMMA) * ratio + (GAMMA - 1.0) / (2.0 * GAMMA)).sqrt()
        })
    }

    /// Self-similar solution at `xi = (x - x0) / t`.
    pub fn sample(&self, xi: f64) -> RiemannState {
        let g = GAMMA;
        if xi <= self.u_star {
            let l = &self.left;
            let cl = l.sound_speed();
            if self.p_star > l.p {
                let ratio = self.p_star / l.p;
                let speed = l.u - cl * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
                if xi <= speed {
                    *l
                } else {
                    RiemannState::new(self.star_density(l), self.u_star, self.p_star)
                }
            } else {
                let head = l.u - cl;
                let c_star = cl * (self.p_star / l.p).powf((g - 1.0) / (2.0 * g));
                let tail = self.u_star - c_star;
                if xi <= head {
                    *l
                } else if xi >= tail {
                    RiemannState::new(self.star_density(l), self.u_star, self.p_star)
                } else {
                    let k = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * cl) * (l.u - xi);
                    let rho = l.rho * k.powf(2.0 / (g - 1.0));
                    let u = 2.0 / (g + 1.0) * (cl + (g - 1.0) / 2.0 * l.u + xi);
                    RiemannState::new(rho, u, l.p * k.powf(2.0 * g / (g - 1.0)))
                }
            }
        } else {
            let r = &self.right;
            let cr = r.sound_speed();
            if let Some(speed) = self.right_shock_speed() {
                if xi >= speed {
                    *r
                } else {
                    RiemannState::new(self.star_density(r), self.u_star, self.p_star)
                }
            } else {
                let head = r.u + cr;
                let c_star = cr * (self.p_star / r.p).powf((g - 1.0) / (2.0 * g));
                let tail = self.u_star + c_star;
                if xi >= head {
                    *r
                } else if xi <= tail {
                    RiemannState::new(self.star_density(r), self.u_star, self.p_star)
                } else {
                    let k = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * cr) * (r.u - xi);
                    let rho = r.rho * k.powf(2.0 / (g - 1.0));
                    let u = 2.0 / (g + 1.0) * (-cr + (g - 1.0) / 2.0 * r.u + xi);
                    RiemannState::new(rho, u, r.p * k.powf(2.0 * g / (g - 1.0)))
                }
            }
        }
    }
}

/// Shock tube with random left/right densities and membrane position; the
/// quantity of interest is the density at `(x, t) = (0.7, 0.1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SodShockTube {
    pub p_left: f64,
    pub p_right: f64,
    pub x: f64,
    pub t: f64,
}

impl Default for SodShockTube {
    fn default() -> Self {
        Self { p_left: 1.0, p_right: 0.1, x: 0.7, t: 0.1 }
    }
}

impl SodShockTube {
    pub fn params() -> Result<ParameterMap<f64>> {
        ParameterMap::new(vec![
            MarginalDistribution::uniform(0.7, 1.3)?,
            MarginalDistribution::uniform(0.05, 0.2)?,
            MarginalDistribution::uniform(0.45, 0.55)?,
        ])
    }

    pub fn density(&self, rho_left: f64, rho_right: f64, x0: f64) -> Result<f64> {
        let sol = RiemannSolution::solve(
            RiemannState::new(rho_left, 0.0, self.p_left),
            RiemannState::new(rho_right, 0.0, self.p_right),
        )?;
        Ok(sol.sample((self.x - x0) / self.t).rho)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let params = Self::params()?;
        let map = params.clone();
        let this = *self;
        Ok(ProblemSpec::new(
            "sod",
            params,
            "shock tube density at x = 0.7, t = 0.1",
            "1",
            move |u| {
                let x = map.map_point(u)?;
                this.density(x[0], x[1], x[2])
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn classic(rho_l: f64, rho_r: f64) -> RiemannSolution {
        RiemannSolution::solve(RiemannState::new(rho_l, 0.0, 1.0), RiemannState::new(rho_r, 0.0, 0.1)).unwrap()
    }

    #[test]
    fn classic_sod() {
        let s = classic(1.0, 0.125);
        assert_relative_eq!(s.p_star, 0.30313, epsilon = 1e-5);
        assert_relative_eq!(s.u_star, 0.92745, epsilon = 1e-5);
        let speed = s.right_shock_speed().unwrap();
        assert_relative_eq!(speed, 1.7522, epsilon = 1e-4);
        assert_relative_eq!(0.5 + 0.1 * speed, 0.6752, epsilon = 1e-4);
        let tube = SodShockTube::default();
        assert_eq!(tube.density(1.0, 0.125, 0.5).unwrap(), 0.125);
        // Shock beyond the probe: post-shock density from the shock relation.
        let behind = tube.density(1.0, 0.125, 0.55).unwrap();
        let ratio = s.p_star / 0.1;
        let g = (GAMMA + 1.0) / (GAMMA - 1.0);
        assert_relative_eq!(behind, 0.125 * (ratio * g + 1.0) / (g + ratio), max_relative = 1e-10);
        assert_relative_eq!(behind, 0.2656, epsilon = 1e-4);
    }

    #[test]
    fn trivial_problem_is_constant() {
        let s = RiemannSolution::solve(RiemannState::new(1.0, 0.0, 1.0), RiemannState::new(1.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(s.p_star, 1.0, max_relative = 1e-12);
        assert!(s.u_star.abs() < 1e-12);
        for xi in [-3.0, -0.5, 0.0, 0.5, 3.0] {
            let st = s.sample(xi);
            assert_relative_eq!(st.rho, 1.0, max_relative = 1e-10);
            assert_relative_eq!(st.p, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn solver_self_checks() {
        for i in 0..=12 {
            for j in 0..=6 {
                let rho_l = 0.7 + 0.05 * i as f64;
                let rho_r = 0.05 + 0.025 * j as f64;
                let s = classic(rho_l, rho_r);
                assert!(s.p_star > 0.0);
                assert!(s.residual().abs() < 1e-10);
                // Entropy: shock on the right iff the star pressure exceeds p_R.
                assert_eq!(s.right_shock_speed().is_some(), s.p_star > 0.1);
                assert!(s.p_star < 1.0);
                // Rankine-Hugoniot mass flux across the right shock.
                let w = s.right_shock_speed().unwrap();
                let rho_star = s.star_density_right();
                assert!((rho_star * (s.u_star - w) - rho_r * (0.0 - w)).abs() < 1e-10);
                // Isentropic left rarefaction.
                assert!((s.star_density_left() - rho_l * (s.p_star / 1.0).powf(1.0 / GAMMA)).abs() < 1e-10);
                // Continuity at the rarefaction tail.
                let c_star = (GAMMA * s.p_star / s.star_density_left()).sqrt();
                let tail = s.sample(s.u_star - c_star - 1e-12);
                assert!((tail.rho - s.star_density_left()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn single_jump_in_membrane_position() {
        let tube = SodShockTube::default();
        // The shock crosses the probe for the nominal states; for a light,
        // fast right state it has passed the probe for every membrane position.
        for (rho_l, rho_r, expected) in [(1.0, 0.125, 1), (0.7, 0.2, 1), (1.3, 0.05, 0)] {
            let values: Vec<f64> =
                (0..1000).map(|k| tube.density(rho_l, rho_r, 0.45 + 0.1 * k as f64 / 999.0).unwrap()).collect();
            let jumps = values.windows(2).filter(|w| (w[1] - w[0]).abs() > 0.05).count();
            assert_eq!(jumps, expected, "rho=({rho_l},{rho_r})");
        }
    }

    #[test]
    fn rejects_bad_states() {
        assert!(RiemannSolution::solve(RiemannState::new(-1.0, 0.0, 1.0), RiemannState::new(1.0, 0.0, 1.0)).is_err());
        assert!(RiemannSolution::solve(RiemannState::new(1.0, -20.0, 1.0), RiemannState::new(1.0, 20.0, 1.0)).is_err());
    }
}
