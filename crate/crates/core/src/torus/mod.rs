//! Flat tori: lattice reduction, periodic Poisson solves, and scale-free
//! gradient integrals over metric balls.

mod lattice;
mod probe;
mod solve;

pub use lattice::{normalize_lattice, torus_distance, Lattice};
pub use probe::{ball_gradient_integral, BallProbe, MIN_BALL_CELLS};
pub use solve::{grid_shape, solve_poisson, TorusSolution, SIGMA_CELLS};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::measure::SignedMeasure;

/// Grid and radii for [`degenerate_family_audit`].
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyOptions {
    /// Cells along the unit generator.
    pub n: usize,
    pub radii: Vec<f64>,
    /// First atom of the dipole; the second sits at `+(½, 0)`.
    pub anchor: Vec2,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            n: 512,
            radii: vec![0.05, 0.1, 0.2, 1.0, 3.0],
            anchor: Vec2::new(0.25, 0.5),
        }
    }
}

/// One `(b, r)` point of the family sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyRow {
    pub b: f64,
    pub r: f64,
    /// `∫_{B_r}|∇u|^p`.
    pub integral: f64,
    pub area: f64,
    /// `r^{(p−2)/p}‖∇u‖_{L^p(B_r)} (Area(B_r)/πr²)^{(p−1)/p} / |μ|`.
    pub normalized: f64,
}

#[derive(Clone, Debug)]
pub struct FamilyAudit {
    pub p: f64,
    pub rows: Vec<FamilyRow>,
}

impl FamilyAudit {
    pub fn max(&self) -> f64 {
        self.rows.iter().map(|r| r.normalized).fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.rows.iter().map(|r| r.normalized).fold(f64::MAX, f64::min)
    }

    /// `max/min` of the normalized quantity over all rows.
    pub fn spread(&self) -> f64 {
        self.max() / self.min()
    }

    /// Largest normalized value per lattice, in input order.
    pub fn max_per_lattice(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(b, _)| *b == r.b) {
                Some(e) => e.1 = e.1.max(r.normalized),
                None => out.push((r.b, r.normalized)),
            }
        }
        out
    }
}

/// The balanced dipole `δ_x − δ_{x+(½,0)}` used across the family.
pub fn family_dipole(anchor: Vec2) -> SignedMeasure {
    SignedMeasure::atomic([(anchor, 1.0), (anchor + Vec2::new(0.5, 0.0), -1.0)])
        .expect("finite weights")
}

/// Normalized ball norms on the rectangular tori `{1, bi}` for the fixed
/// dipole, with balls centred on its positive atom.
pub fn degenerate_family_audit(b_values: &[f64], p: f64, opts: &FamilyOptions) -> Result<FamilyAudit> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::pre(format!("p must lie in [1, 2), got {p}")));
    }
    let mu = family_dipole(opts.anchor);
    let tv = mu.total_variation();
    let mut rows = Vec::new();
    for &b in b_values {
        let l = Lattice::rectangular(b)?;
        let sol = solve_poisson(&l, &mu, opts.n)?;
        let probe = BallProbe::new(&sol, opts.anchor);
        for &r in &opts.radii {
            rows.push(FamilyRow {
                b,
                r,
                integral: probe.gradient_integral(r, p)?,
                area: probe.area(r)?,
                normalized: probe.normalized_norm(r, p)? / tv,
            });
        }
    }
    Ok(FamilyAudit { p, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_one_is_the_plain_ratio() {
        let opts = FamilyOptions {
            n: 128,
            radii: vec![0.2, 1.0],
            ..FamilyOptions::default()
        };
        let a = degenerate_family_audit(&[1.0], 1.0, &opts).unwrap();
        for r in &a.rows {
            assert!((r.normalized - r.integral / (r.r * 2.0)).abs() < 1e-12 * r.normalized);
        }
        assert!(degenerate_family_audit(&[1.0], 2.0, &opts).is_err());
        assert!(degenerate_family_audit(&[0.5], 1.0, &opts).is_err());
    }

    #[test]
    fn family_is_uniform_on_a_coarse_grid() {
        let opts = FamilyOptions {
            n: 256,
            radii: vec![0.1, 0.2, 1.0, 3.0],
            ..FamilyOptions::default()
        };
        let a = degenerate_family_audit(&[1.0, 4.0], 1.5, &opts).unwrap();
        assert!(a.spread() <= 10.0, "{:?}", a.rows);
        assert_eq!(a.max_per_lattice().len(), 2);
    }
}
