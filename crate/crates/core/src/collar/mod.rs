//! Collars of short closed geodesics on hyperbolic surfaces.
//!
//! A geodesic of length `ℓ < 2 asinh 1` has an embedded collar of Fermi
//! half-width `w = asinh(1/sinh(ℓ/2))`. In cylinder coordinates
//! `(t, θ) ∈ (−T, T) × S¹` the hyperbolic metric is `(λ/cos λt)²(dt² + dθ²)`
//! with `λ = ℓ/2π`. Everything here is in curvature −1 units.

mod cylinder;

pub use cylinder::{
    collar_strip_gradient_audit, solve_cylinder, CylinderField, CylinderSolution, RingSampled,
    StripAudit,
};

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Upper limit `2 asinh 1` for collar lengths.
pub fn max_collar_length() -> f64 {
    2.0 * 1f64.asinh()
}

/// `gd⁻¹(x) = log(sec x + tan x)` on `(−π/2, π/2)`.
#[inline]
fn gd_inv(x: f64) -> f64 {
    x.tan().asinh()
}

/// Parameters of the standard collar about a geodesic of length `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollarParams {
    pub ell: f64,
    /// Fermi half-width.
    pub w: f64,
    /// Cylinder half-length.
    pub t_max: f64,
    pub lambda: f64,
}

impl CollarParams {
    /// `λT = π/2 − 2 atan(e^{−w})`, evaluated without cancellation.
    pub fn lambda_t(&self) -> f64 {
        0.5 * PI - 2.0 * (-self.w).exp().atan()
    }
}

pub fn collar_from_length(ell: f64) -> Result<CollarParams> {
    if !(ell > 0.0 && ell < max_collar_length()) {
        return Err(Error::pre(format!(
            "collar length must lie in (0, 2 asinh 1), got {ell}"
        )));
    }
    let w = (1.0 / (0.5 * ell).sinh()).asinh();
    // T = 4π atan(e^w)/ℓ − π²/ℓ = (π² − 4π atan(e^{−w}))/ℓ
    let t_max = (PI * PI - 4.0 * PI * (-w).exp().atan()) / ell;
    Ok(CollarParams {
        ell,
        w,
        t_max,
        lambda: ell / (2.0 * PI),
    })
}

/// Cylinder coordinate of the point at signed Fermi distance `ρ`.
pub fn fermi_to_cylinder(p: &CollarParams, rho: f64) -> Result<f64> {
    if !(rho.abs() < p.w) {
        return Err(Error::pre(format!("|ρ| must be below w = {}, got {rho}", p.w)));
    }
    // 4π atan(e^ρ)/ℓ − π²/ℓ = gd(ρ)/λ
    Ok((2.0 * rho.exp().atan() - 0.5 * PI) / p.lambda)
}

pub fn cylinder_to_fermi(p: &CollarParams, t: f64) -> Result<f64> {
    if !(t.abs() < p.t_max) {
        return Err(Error::pre(format!("|t| must be below T = {}, got {t}", p.t_max)));
    }
    Ok(gd_inv(p.lambda * t))
}

/// `λ/cos(λt)`.
pub fn collar_conformal_factor(p: &CollarParams, t: f64) -> Result<f64> {
    if !(t.abs() < p.t_max) {
        return Err(Error::pre(format!("|t| must be below T = {}, got {t}", p.t_max)));
    }
    Ok(p.lambda / (p.lambda * t).cos())
}

/// Hyperbolic distance between the circles `{t₁} × S¹` and `{t₂} × S¹`,
/// `|∫_{t₁}^{t₂} λ sec(λs) ds|`. The closed range `|tᵢ| ≤ T` is accepted.
pub fn collar_distance(p: &CollarParams, t1: f64, t2: f64) -> Result<f64> {
    for t in [t1, t2] {
        if !(t.abs() <= p.t_max) {
            return Err(Error::pre(format!("|t| must not exceed T = {}, got {t}", p.t_max)));
        }
    }
    let g = |t: f64| {
        if t == p.t_max {
            p.w
        } else if t == -p.t_max {
            -p.w
        } else {
            gd_inv(p.lambda * t)
        }
    };
    Ok((g(t2) - g(t1)).abs())
}

/// Injectivity radius at the circle `T − t`, from
/// `sinh r = cosh(ℓ/2) cosh d − sinh d` with `d = d_{T−t, T}`.
pub fn injectivity_radius_profile(p: &CollarParams, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t < 2.0 * p.t_max) {
        return Err(Error::pre(format!("t must lie in [0, 2T), got {t}")));
    }
    let d = collar_distance(p, p.t_max - t, p.t_max)?;
    // cosh(ℓ/2)cosh d − sinh d = e^{−d} + 2 sinh²(ℓ/4) cosh d
    let s = (0.25 * p.ell).sinh();
    Ok(((-d).exp() + 2.0 * s * s * d.cosh()).asinh())
}

/// Residuals of the small-`ℓ` expansions
/// `w ≈ log(4/ℓ)`, `T ≈ π²/ℓ − π`, `d_{T−t,T} ≈ log((π+t)/π)` and
/// `sinh r ≈ π/(π+t)`; the last two as maxima over `t ∈ [0, 10]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticResiduals {
    pub width: f64,
    pub half_length: f64,
    pub distance: f64,
    pub sinh_radius: f64,
}

impl AsymptoticResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.width, self.half_length, self.distance, self.sinh_radius]
    }

    pub const NAMES: [&'static str; 4] = ["width", "half_length", "distance", "sinh_radius"];
}

pub fn asymptotic_residuals(p: &CollarParams) -> Result<AsymptoticResiduals> {
    let width = (p.w - (4.0 / p.ell).ln()).abs();
    let half_length = (p.t_max - (PI * PI / p.ell - PI)).abs();
    let mut distance: f64 = 0.0;
    let mut sinh_radius: f64 = 0.0;
    for k in 0..=100 {
        let t = 0.1 * k as f64;
        if t >= p.t_max {
            break;
        }
        let d = collar_distance(p, p.t_max - t, p.t_max)?;
        distance = distance.max((d - ((PI + t) / PI).ln()).abs());
        let r = injectivity_radius_profile(p, t)?;
        sinh_radius = sinh_radius.max((r.sinh() - PI / (PI + t)).abs());
    }
    Ok(AsymptoticResiduals {
        width,
        half_length,
        distance,
        sinh_radius,
    })
}

/// Outcome of [`ratio_bound_audit`].
#[derive(Clone, Debug, PartialEq)]
pub struct RatioAudit {
    pub evaluated: usize,
    /// Indices of samples violating `|tᵢ| < T − 1`, `|t₂ − t₁| < 2`.
    pub rejected: Vec<usize>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub c0: f64,
}

impl RatioAudit {
    pub fn passed(&self) -> bool {
        self.evaluated > 0 && self.min_ratio > 1.0 / self.c0 && self.max_ratio < self.c0
    }
}

/// Checks `C₀⁻¹ < cos λt₂ / cos λt₁ < C₀` with `C₀ = e²`.
pub fn ratio_bound_audit(p: &CollarParams, samples: &[(f64, f64)]) -> RatioAudit {
    let c0 = 2f64.exp();
    let lim = p.t_max - 1.0;
    let mut rejected = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut evaluated = 0;
    for (k, &(t1, t2)) in samples.iter().enumerate() {
        if !(t1.abs() < lim && t2.abs() < lim && (t2 - t1).abs() < 2.0) {
            rejected.push(k);
            continue;
        }
        let r = (p.lambda * t2).cos() / (p.lambda * t1).cos();
        lo = lo.min(r);
        hi = hi.max(r);
        evaluated += 1;
    }
    RatioAudit {
        evaluated,
        rejected,
        min_ratio: lo,
        max_ratio: hi,
        c0,
    }
}

/// Uniform admissible samples for [`ratio_bound_audit`].
pub fn random_ratio_samples<R: Rng>(p: &CollarParams, n: usize, rng: &mut R) -> Vec<(f64, f64)> {
    let lim = p.t_max - 1.0;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t1 = rng.gen_range(-lim..lim);
        let t2 = t1 + rng.gen_range(-2.0..2.0);
        if t2.abs() < lim && (t2 - t1).abs() < 2.0 && t1.abs() < lim {
            out.push((t1, t2));
        }
    }
    out
}

/// Closed hyperbolic surface of genus `g ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TopologyData {
    pub genus: u32,
    pub euler: i64,
}

impl TopologyData {
    pub fn from_genus(genus: u32) -> Result<Self> {
        if genus < 2 {
            return Err(Error::pre(format!("hyperbolic surfaces need genus ≥ 2, got {genus}")));
        }
        Ok(TopologyData {
            genus,
            euler: 2 - 2 * genus as i64,
        })
    }

    /// Gauss–Bonnet area `2π|χ|`.
    pub fn area(&self) -> f64 {
        2.0 * PI * self.euler.unsigned_abs() as f64
    }

    pub fn max_collars(&self) -> u32 {
        3 * self.genus - 3
    }

    /// Largest `r` with `2π(cosh r − 1) ≤ Area(Σ)`.
    pub fn injectivity_ceiling(&self) -> f64 {
        (1.0 + self.euler.unsigned_abs() as f64).acosh()
    }
}

/// `2π(cosh r − 1)`.
pub fn hyperbolic_ball_area(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::pre(format!("radius must be non-negative, got {r}")));
    }
    let s = (0.5 * r).sinh();
    Ok(4.0 * PI * s * s)
}

/// Vitali count `⌈Area(Σ)/V_{a/10}⌉`.
pub fn covering_count_bound(top: &TopologyData, a: f64) -> Result<u64> {
    if !(a > 0.0) {
        return Err(Error::pre(format!("a must be positive, got {a}")));
    }
    let v = hyperbolic_ball_area(a / 10.0)?;
    Ok((top.area() / v).ceil() as u64)
}

/// `2 sinh(r/2)/(1 − sinh²(r/2)|x|²)`.
pub fn disk_chart_factor(r: f64, x: Vec2) -> Result<f64> {
    let c = (0.5 * r).sinh();
    let den = 1.0 - c * c * x.norm_sq();
    if !(den > 0.0) {
        return Err(Error::pre(format!(
            "1 − sinh²(r/2)|x|² must be positive, got {den}"
        )));
    }
    Ok(2.0 * c / den)
}

/// `−Δ log f / f²` by the 5-point Laplacian with step `h`.
pub fn disk_chart_curvature(r: f64, x: Vec2, h: f64) -> Result<f64> {
    let lf = |y: Vec2| disk_chart_factor(r, y).map(f64::ln);
    let lap = (lf(x + Vec2::new(h, 0.0))? + lf(x - Vec2::new(h, 0.0))? + lf(x + Vec2::new(0.0, h))?
        + lf(x - Vec2::new(0.0, h))?
        - 4.0 * lf(x)?)
        / (h * h);
    let f = disk_chart_factor(r, x)?;
    Ok(-lap / (f * f))
}

/// Chart distance from the origin to `|x| = 1`, `2 artanh(sinh(r/2))`.
pub fn disk_chart_radius(r: f64) -> Result<f64> {
    let c = (0.5 * r).sinh();
    if !(c < 1.0) {
        return Err(Error::pre(format!("needs sinh(r/2) < 1, got {c}")));
    }
    Ok(2.0 * c.atanh())
}

/// Dyadic assembly `per_disk·Σ_{i=1}^{m} (2^{−i})^{2−p}` for `a = 2^{−m}`,
/// or the full series for `a = 0`.
pub fn annulus_estimate_audit(a: f64, p: f64, per_disk_bound: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::pre(format!("p must lie in [1, 2), got {p}")));
    }
    if !(0.0..=0.25).contains(&a) {
        return Err(Error::pre(format!("a must lie in [0, 1/4], got {a}")));
    }
    let q = 2f64.powf(p - 2.0);
    if a == 0.0 {
        return Ok(per_disk_bound * q / (1.0 - q));
    }
    let m = -a.log2();
    if (m - m.round()).abs() > 1e-12 {
        return Err(Error::pre(format!("a must be 0 or a power 2^-m, got {a}")));
    }
    let m = m.round() as i32;
    Ok(per_disk_bound * (1..=m).map(|i| q.powi(i)).sum::<f64>())
}
