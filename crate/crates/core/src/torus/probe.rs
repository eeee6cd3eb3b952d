//! Gradient integrals over metric balls of the torus.

use std::f64::consts::PI;

use super::lattice::torus_distance;
use super::solve::TorusSolution;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::par;

/// Smallest resolvable ball radius, in grid steps.
pub const MIN_BALL_CELLS: f64 = 5.0;

/// Torus distances from `x0` to every node of a solution, reusable across
/// radii and exponents.
pub struct BallProbe<'a> {
    sol: &'a TorusSolution,
    pub x0: Vec2,
    dist: Vec<f64>,
}

impl<'a> BallProbe<'a> {
    pub fn new(sol: &'a TorusSolution, x0: Vec2) -> Self {
        let nv = sol.n_v;
        let dist = par::map_range(sol.u.len(), |k| {
            torus_distance(&sol.lattice, x0, sol.node(k % nv, k / nv))
        });
        BallProbe { sol, x0, dist }
    }

    fn check(&self, r: f64) -> Result<()> {
        let limit = MIN_BALL_CELLS * self.sol.grid_step();
        if !(r >= limit) {
            return Err(Error::Unresolved { radius: r, limit });
        }
        Ok(())
    }

    /// `∫_{B_r(x0)} |∇u|^p` by node quadrature.
    pub fn gradient_integral(&self, r: f64, p: f64) -> Result<f64> {
        self.check(r)?;
        if !(p >= 1.0) {
            return Err(Error::pre(format!("exponent must be ≥ 1, got {p}")));
        }
        let s = self.sol;
        let sum = par::sum_range(self.dist.len(), |k| {
            if self.dist[k] <= r {
                s.grad_x[k].hypot(s.grad_y[k]).powf(p)
            } else {
                0.0
            }
        });
        Ok(sum * s.cell_area())
    }

    /// Flat area of `B_r(x0)`; the whole torus once `r` exceeds the
    /// covering radius.
    pub fn area(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        let count = self.dist.iter().filter(|&&d| d <= r).count();
        Ok(count as f64 * self.sol.cell_area())
    }

    /// `r^{(p−2)/p} ‖∇u‖_{L^p(B_r)} / (πr²/Area(B_r))^{(p−1)/p}`.
    pub fn normalized_norm(&self, r: f64, p: f64) -> Result<f64> {
        let int = self.gradient_integral(r, p)?;
        let area = self.area(r)?;
        let q = (p - 1.0) / p;
        Ok(r.powf((p - 2.0) / p) * int.powf(1.0 / p) / (PI * r * r / area).powf(q))
    }
}

/// `∫_{B_r(x0)} |∇u|^p` over the torus ball `{x: d(x, x0) ≤ r}`.
pub fn ball_gradient_integral(sol: &TorusSolution, x0: Vec2, r: f64, p: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::pre(format!("p must lie in [1, 2), got {p}")));
    }
    BallProbe::new(sol, x0).gradient_integral(r, p)
}
