use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Tolerance for deciding that `a² + b² = 1`.
const UNIT_CIRCLE_TOL: f64 = 1e-12;

/// A flat torus `ℂ/(ℤ + τℤ)`, `τ = a + bi`, in the reduced form
/// `−½ < a ≤ ½`, `|τ| ≥ 1`, `a ≥ 0` on `|τ| = 1`.
///
/// The generators used for computation are `v = (ρ, 0)` and
/// `w = (cos θ, sin θ)` with `τ = ρe^{iθ}`: the same lattice reflected so
/// that the short generator `w` has unit length and the long one lies on
/// the `x¹`-axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub theta: f64,
    pub v: Vec2,
    pub w: Vec2,
}

impl Lattice {
    fn from_reduced(a: f64, b: f64) -> Lattice {
        let rho = a.hypot(b);
        let theta = (a / rho).clamp(-1.0, 1.0).acos();
        Lattice {
            a,
            b,
            rho,
            theta,
            v: Vec2::new(rho, 0.0),
            w: Vec2::new(theta.cos(), theta.sin()),
        }
    }

    /// The square lattice `{1, i}`.
    pub fn square() -> Lattice {
        Lattice::from_reduced(0.0, 1.0)
    }

    /// Rectangular lattice `{1, bi}`, `b ≥ 1`.
    pub fn rectangular(b: f64) -> Result<Lattice> {
        if !(b >= 1.0) {
            return Err(Error::pre(format!("rectangular lattice needs b ≥ 1, got {b}")));
        }
        Ok(Lattice::from_reduced(0.0, b))
    }

    pub fn area(&self) -> f64 {
        self.rho * self.theta.sin()
    }

    /// Dual basis `(v*, w*)` with `v*·v = w*·w = 1`, `v*·w = w*·v = 0`.
    pub fn dual(&self) -> (Vec2, Vec2) {
        let det = self.v.x * self.w.y - self.v.y * self.w.x;
        (
            Vec2::new(self.w.y / det, -self.w.x / det),
            Vec2::new(-self.v.y / det, self.v.x / det),
        )
    }

    /// Lattice coordinates `(s, t)` with `x = s·v + t·w`.
    pub fn coords(&self, x: Vec2) -> (f64, f64) {
        let (vs, ws) = self.dual();
        (vs.dot(x), ws.dot(x))
    }

    pub fn point(&self, s: f64, t: f64) -> Vec2 {
        self.v * s + self.w * t
    }

    /// Representative of `x` in the fundamental cell `{s·v + t·w: s, t ∈ [0, 1)}`.
    pub fn wrap(&self, x: Vec2) -> Vec2 {
        let (s, t) = self.coords(x);
        self.point(s.rem_euclid(1.0), t.rem_euclid(1.0))
    }

    /// Radius of the disks used as isothermal charts, `min(√3/4, b/4)`.
    pub fn chart_radius(&self) -> f64 {
        (3f64.sqrt() / 4.0).min(self.b / 4.0)
    }

    /// Half the shortest lattice vector.
    pub fn injectivity_radius(&self) -> f64 {
        0.5 * self.v.norm().min(self.w.norm())
    }
}

/// Reduces `τ = a + bi` to the standard fundamental domain of the modular
/// group by translations `τ ↦ τ ± 1` and inversions `τ ↦ −1/τ`.
pub fn normalize_lattice(a: f64, b: f64) -> Result<Lattice> {
    if !(a.is_finite() && b.is_finite()) || b == 0.0 {
        return Err(Error::pre(format!("degenerate lattice (a, b) = ({a}, {b})")));
    }
    // {1, τ} and {1, −τ} span the same lattice
    let (mut a, mut b) = if b < 0.0 { (-a, -b) } else { (a, b) };
    for _ in 0..200 {
        a -= (a - 0.5).ceil();
        let r2 = a * a + b * b;
        if r2 >= 1.0 - UNIT_CIRCLE_TOL {
            break;
        }
        a = -a / r2;
        b /= r2;
    }
    if (a * a + b * b - 1.0).abs() <= UNIT_CIRCLE_TOL && a < 0.0 {
        a = -a;
    }
    let l = Lattice::from_reduced(a, b);
    debug_assert!(l.theta >= PI / 3.0 - 1e-9 && l.theta < 2.0 * PI / 3.0 + 1e-9);
    Ok(l)
}

/// Flat distance on the torus: the shortest representative of `y − x`
/// modulo the lattice.
pub fn torus_distance(l: &Lattice, x: Vec2, y: Vec2) -> f64 {
    let (s, t) = l.coords(y - x);
    let (s, t) = (s - s.round(), t - t.round());
    let d = l.point(s, t);
    let mut best = d.norm_sq();
    for i in -3..=3 {
        for j in -3..=3 {
            if i == 0 && j == 0 {
                continue;
            }
            best = best.min((d + l.v * i as f64 + l.w * j as f64).norm_sq());
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_examples() {
        let l = normalize_lattice(0.5, 2.0).unwrap();
        assert_eq!((l.a, l.b), (0.5, 2.0));
        assert!((l.rho - 4.25f64.sqrt()).abs() < 1e-15);
        let l = normalize_lattice(0.5, 3f64.sqrt() / 2.0).unwrap();
        assert!((l.rho - 1.0).abs() < 1e-15);
        assert!((l.theta - PI / 3.0).abs() < 1e-12);
        // boundary cases fold onto the admissible side
        let l = normalize_lattice(-0.5, 3.0).unwrap();
        assert_eq!(l.a, 0.5);
        let l = normalize_lattice(-0.4f64.sin(), 0.4f64.cos()).unwrap();
        assert!(l.a >= 0.0 && (l.rho - 1.0).abs() < 1e-12);
        assert!(normalize_lattice(0.3, 0.0).is_err());
    }

    #[test]
    fn inversion_reduces_small_tau() {
        // τ = 0.1 + 0.2i is equivalent to τ' with |τ'| ≥ 1
        let l = normalize_lattice(0.1, 0.2).unwrap();
        assert!(l.a > -0.5 && l.a <= 0.5 && l.rho >= 1.0 - 1e-12);
        // area of {1, τ}-lattices is b; both v and w are lattice vectors
        assert!((l.area() - l.b).abs() < 1e-12);
        assert!((l.w.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        let sq = Lattice::square();
        let d = torus_distance(&sq, Vec2::ZERO, Vec2::new(0.9, 0.0));
        assert!((d - 0.1).abs() < 1e-15);
        let d = torus_distance(&sq, Vec2::new(0.1, 0.1), Vec2::new(0.9, 0.9));
        assert!((d - 0.08f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dual_basis_and_wrap() {
        let l = normalize_lattice(0.3, 1.7).unwrap();
        let (vs, ws) = l.dual();
        assert!((vs.dot(l.v) - 1.0).abs() < 1e-14 && vs.dot(l.w).abs() < 1e-14);
        assert!((ws.dot(l.w) - 1.0).abs() < 1e-14 && ws.dot(l.v).abs() < 1e-14);
        let x = Vec2::new(-3.3, 7.1);
        let (s, t) = l.coords(l.wrap(x));
        assert!((0.0..1.0).contains(&s) && (0.0..1.0).contains(&t));
        assert!(torus_distance(&l, x, l.wrap(x)) < 1e-12);
    }

    fn brute(l: &Lattice, x: Vec2, y: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for i in -10..=10 {
            for j in -10..=10 {
                best = best.min((y + l.v * i as f64 + l.w * j as f64 - x).norm());
            }
        }
        best
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent_and_admissible(a in -3.0..3.0f64, b in 0.05..5.0f64) {
            let l = normalize_lattice(a, b).unwrap();
            prop_assert!(l.a > -0.5 && l.a <= 0.5);
            prop_assert!(l.rho >= 1.0 - 1e-12);
            prop_assert!(l.theta >= PI / 3.0 - 1e-12 && l.theta < 2.0 * PI / 3.0);
            let again = normalize_lattice(l.a, l.b).unwrap();
            prop_assert_eq!(again, l);
        }

        #[test]
        fn distance_matches_brute_force_and_is_a_metric(
            a in -0.5..0.5f64, b in 0.87..6.0f64,
            s in prop::array::uniform6(0.0..1.0f64),
        ) {
            prop_assume!(a * a + b * b >= 1.0);
            let l = normalize_lattice(a, b).unwrap();
            let x = l.point(s[0], s[1]);
            let y = l.point(s[2], s[3]);
            let z = l.point(s[4], s[5]);
            let dxy = torus_distance(&l, x, y);
            prop_assert!((dxy - brute(&l, x, y)).abs() < 1e-12);
            prop_assert!((dxy - torus_distance(&l, y, x)).abs() < 1e-12);
            prop_assert!(dxy <= 0.5 * (l.v.norm() + l.w.norm()) + 1e-12);
            prop_assert!(torus_distance(&l, x, z) <= dxy + torus_distance(&l, y, z) + 1e-12);
        }
    }
}
