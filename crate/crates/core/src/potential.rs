//! The planar logarithmic potential
//!
//! ```text
//! I_μ(x) = −(1/2π) ∫ log|x − y| dμ(y)
//! ```
//!
//! which weakly solves `−ΔI_μ = μ`, together with the integral functionals
//! that control it: the scale-invariant gradient functional
//! `r^{q−2}∫_{D_r(x)}|∇I_μ|^q`, exponential integrability, the
//! Moser–Trudinger type integral of `e^{p|u|}`, and a mean-value test for the
//! harmonic remainder `u − I_μ`.
//!
//! Atoms are evaluated in closed form. Densities are piecewise constant on
//! grid cells and integrated exactly against the log kernel, except far from
//! the grid where the midpoint rule takes over.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geom::Vec2;
use crate::measure::{DensityGrid, SignedMeasure};
use crate::par;
use crate::quadrature::{polar_integrate, PolarTolerance};

const INV_2PI: f64 = 1.0 / (2.0 * PI);

/// `a·atan(b/a)`, continuously extended by 0 at `a = 0`.
#[inline]
fn xatan(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * (b / a).atan()
    }
}

/// `∫∫ log√(u²+v²) du dv` antiderivative.
fn log_antideriv2(u: f64, v: f64) -> f64 {
    let r2 = u * u + v * v;
    let l = if r2 == 0.0 { 0.0 } else { u * v * (r2.ln() - 3.0) };
    0.5 * (l + u * xatan(u, v) + v * xatan(v, u))
}

/// `∫ log√(a²+b²) db` antiderivative in `b`.
fn log_antideriv1(a: f64, b: f64) -> f64 {
    let r2 = a * a + b * b;
    let l = if r2 == 0.0 { 0.0 } else { 0.5 * b * r2.ln() };
    l - b + xatan(a, b)
}

/// Exact `∫_{[lo,hi]} log|x − y| dy` over an axis-aligned rectangle.
pub fn rect_log_integral(x: Vec2, lo: Vec2, hi: Vec2) -> f64 {
    let (u1, u2) = (lo.x - x.x, hi.x - x.x);
    let (v1, v2) = (lo.y - x.y, hi.y - x.y);
    log_antideriv2(u2, v2) - log_antideriv2(u1, v2) - log_antideriv2(u2, v1)
        + log_antideriv2(u1, v1)
}

/// Exact `∇_x ∫_{[lo,hi]} log|x − y| dy`.
pub fn rect_log_gradient(x: Vec2, lo: Vec2, hi: Vec2) -> Vec2 {
    let (u1, u2) = (lo.x - x.x, hi.x - x.x);
    let (v1, v2) = (lo.y - x.y, hi.y - x.y);
    let gx = -(log_antideriv1(u2, v2) - log_antideriv1(u2, v1) - log_antideriv1(u1, v2)
        + log_antideriv1(u1, v1));
    let gy = -(log_antideriv1(v2, u2) - log_antideriv1(v2, u1) - log_antideriv1(v1, u2)
        + log_antideriv1(v1, u1));
    Vec2::new(gx, gy)
}

/// Quadrature controls for [`PotentialField`].
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSettings {
    /// Cells per side for grid quadratures (weak-form residuals).
    pub grid: usize,
    pub polar: PolarTolerance,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            grid: 1024,
            polar: PolarTolerance::default(),
        }
    }
}

/// Grid of cached `(I_μ, ∇I_μ)` samples at nodes `origin + h·(i, j)`.
#[derive(Clone, Debug)]
pub struct PotentialCache {
    pub origin: Vec2,
    pub h: f64,
    pub n: usize,
    pub samples: Vec<(f64, Vec2)>,
}

/// `I_μ` for a fixed source measure.
#[derive(Clone, Debug)]
pub struct PotentialField {
    source: SignedMeasure,
    settings: QuadratureSettings,
    cache: Option<PotentialCache>,
}

impl PotentialField {
    pub fn new(source: SignedMeasure) -> Self {
        PotentialField {
            source,
            settings: QuadratureSettings::default(),
            cache: None,
        }
    }

    pub fn with_settings(mut self, settings: QuadratureSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn source(&self) -> &SignedMeasure {
        &self.source
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    fn pole_at(&self, x: Vec2) -> Option<Error> {
        self.source.atoms().iter().find(|a| a.pos == x).map(|a| Error::Pole {
            x: x.x,
            y: x.y,
            sign: if a.weight > 0.0 { 1 } else { -1 },
        })
    }

    pub fn value(&self, x: Vec2) -> Result<f64> {
        match self.pole_at(x) {
            Some(e) => Err(e),
            None => Ok(self.value_unchecked(x)),
        }
    }

    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        match self.pole_at(x) {
            Some(e) => Err(e),
            None => Ok(self.gradient_unchecked(x)),
        }
    }

    /// `I_μ(x)` without the pole check (`±∞` at atoms).
    pub fn value_unchecked(&self, x: Vec2) -> f64 {
        let atoms: f64 = self
            .source
            .atoms()
            .iter()
            .map(|a| a.weight * (x - a.pos).norm().ln())
            .sum();
        let dens = self.source.density().map_or(0.0, |d| density_log(d, x));
        -INV_2PI * (atoms + dens)
    }

    /// `∇I_μ(x)` without the pole check.
    pub fn gradient_unchecked(&self, x: Vec2) -> Vec2 {
        let mut g = Vec2::ZERO;
        for a in self.source.atoms() {
            let d = x - a.pos;
            g += d * (a.weight / d.norm_sq());
        }
        if let Some(d) = self.source.density() {
            g += density_log_gradient(d, x);
        }
        g * -INV_2PI
    }

    /// `∫_{[lo,hi]} I_μ dx` over a small rectangle; atoms inside the
    /// rectangle are integrated exactly, everything else by the midpoint
    /// rule.
    pub fn cell_integral(&self, lo: Vec2, hi: Vec2) -> f64 {
        let c = (lo + hi) * 0.5;
        let area = (hi.x - lo.x) * (hi.y - lo.y);
        let mut acc = 0.0;
        for a in self.source.atoms() {
            let inside = a.pos.x >= lo.x && a.pos.x < hi.x && a.pos.y >= lo.y && a.pos.y < hi.y;
            acc += a.weight
                * if inside {
                    rect_log_integral(a.pos, lo, hi)
                } else {
                    area * (c - a.pos).norm().ln()
                };
        }
        let dens = self
            .source
            .density()
            .map_or(0.0, |d| area * density_log(d, c));
        -INV_2PI * (acc + dens)
    }

    /// Samples `(I_μ, ∇I_μ)` on an `n×n` node grid over `[lo, hi]²`; nodes
    /// at atoms hold `(±∞, NaN)`.
    pub fn build_cache(&mut self, lo: f64, hi: f64, n: usize) {
        let h = (hi - lo) / (n - 1) as f64;
        let origin = Vec2::new(lo, lo);
        let samples = par::map_range(n * n, |k| {
            let x = origin + Vec2::new((k % n) as f64 * h, (k / n) as f64 * h);
            (self.value_unchecked(x), self.gradient_unchecked(x))
        });
        self.cache = Some(PotentialCache {
            origin,
            h,
            n,
            samples,
        });
    }

    pub fn cache(&self) -> Option<&PotentialCache> {
        self.cache.as_ref()
    }
}

impl ScalarField for PotentialField {
    fn value(&self, x: Vec2) -> f64 {
        self.value_unchecked(x)
    }
    fn singular_points(&self) -> Vec<Vec2> {
        self.source.singular_points()
    }
}

/// Signed corner weights of a piecewise-constant density: summing
/// `w·F(corner − x)` over corners gives the exact cell-by-cell integral of any
/// kernel with mixed antiderivative `F`.
fn corner_weights(d: &DensityGrid) -> impl Iterator<Item = (Vec2, f64)> + '_ {
    let (nx, ny) = (d.nx(), d.ny());
    let f = move |i: isize, j: isize| {
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            0.0
        } else {
            d.get(i as usize, j as usize)
        }
    };
    (0..=ny).flat_map(move |j| {
        (0..=nx).filter_map(move |i| {
            let (ii, jj) = (i as isize, j as isize);
            let w = f(ii, jj) - f(ii - 1, jj) - f(ii, jj - 1) + f(ii - 1, jj - 1);
            (w != 0.0).then(|| {
                let p = d.origin() + Vec2::new(i as f64 * d.h(), j as f64 * d.h());
                (p, w)
            })
        })
    })
}

/// Beyond this many grid diameters the midpoint rule is used: the exact
/// corner sum cancels catastrophically far away, the midpoint error decays.
const FAR_FIELD: f64 = 4.0;

fn is_far(d: &DensityGrid, x: Vec2) -> bool {
    let lo = d.origin();
    let hi = lo + Vec2::new(d.nx() as f64 * d.h(), d.ny() as f64 * d.h());
    let dx = (lo.x - x.x).max(x.x - hi.x).max(0.0);
    let dy = (lo.y - x.y).max(x.y - hi.y).max(0.0);
    Vec2::new(dx, dy).norm() > FAR_FIELD * (hi - lo).norm()
}

/// `∫ f(y) log|x−y| dy` for a piecewise-constant density `f`.
fn density_log(d: &DensityGrid, x: Vec2) -> f64 {
    if is_far(d, x) {
        let area = d.cell_area();
        return d
            .nonzero()
            .map(|(i, j, f)| f * area * (x - d.center(i, j)).norm().ln())
            .sum();
    }
    corner_weights(d)
        .map(|(p, w)| {
            let u = p - x;
            w * log_antideriv2(u.x, u.y)
        })
        .sum()
}

fn density_log_gradient(d: &DensityGrid, x: Vec2) -> Vec2 {
    if is_far(d, x) {
        let area = d.cell_area();
        return d.nonzero().fold(Vec2::ZERO, |acc, (i, j, f)| {
            let r = x - d.center(i, j);
            acc + r * (f * area / r.norm_sq())
        });
    }
    corner_weights(d).fold(Vec2::ZERO, |acc, (p, w)| {
        let u = p - x;
        acc - Vec2::new(log_antideriv1(u.x, u.y), log_antideriv1(u.y, u.x)) * w
    })
}

/// `I_μ(x)`; evaluation at an atom is reported as [`Error::Pole`].
pub fn eval_potential(mu: &SignedMeasure, x: Vec2) -> Result<f64> {
    PotentialField::new(mu.clone()).value(x)
}

/// `∇I_μ(x)`; evaluation at an atom is reported as [`Error::Pole`].
pub fn eval_gradient(mu: &SignedMeasure, x: Vec2) -> Result<Vec2> {
    PotentialField::new(mu.clone()).gradient(x)
}

/// `r^{q−2} ∫_{D_r(x)} |∇I_μ|^q`, scale invariant for `q ∈ [1, 2)`.
pub fn scaling_functional(mu: &SignedMeasure, x: Vec2, r: f64, q: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::pre(format!("radius must be positive, got {r}")));
    }
    if !(1.0..2.0).contains(&q) {
        return Err(Error::pre(format!("q must lie in [1, 2), got {q}")));
    }
    let field = PotentialField::new(mu.clone());
    let res = polar_integrate(
        |y| field.gradient_unchecked(y).norm().powf(q),
        x,
        r,
        &mu.singular_points(),
        field.settings.polar,
    );
    Ok(r.powf(q - 2.0) * res.value)
}

/// `∫_{D_R} exp((4π − ε)|I_μ| / |μ|)` for `μ` supported in the unit disk.
pub fn exp_integrability(mu: &SignedMeasure, big_r: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 4.0 * PI) {
        return Err(Error::pre(format!("ε must lie in (0, 4π), got {eps}")));
    }
    if !(big_r > 0.0) {
        return Err(Error::pre(format!("R must be positive, got {big_r}")));
    }
    let tv = mu.total_variation();
    if !(tv > 0.0) {
        return Err(Error::pre("|μ| must be positive"));
    }
    let outside_atom = mu.atoms().iter().any(|a| a.pos.norm() >= 1.0);
    let outside_cell = mu.density().is_some_and(|d| {
        d.nonzero()
            .any(|(i, j, _)| d.center(i, j).norm() >= 1.0)
    });
    if outside_atom || outside_cell {
        return Err(Error::pre("μ must be supported in the unit disk"));
    }
    let field = PotentialField::new(mu.clone());
    let k = (4.0 * PI - eps) / tv;
    let res = polar_integrate(
        |y| (k * field.value_unchecked(y).abs()).exp(),
        Vec2::ZERO,
        big_r,
        &mu.singular_points(),
        field.settings.polar,
    );
    Ok(res.value)
}

/// `∫_{D_{1/2}} e^{p|u|} dx`.
pub fn moser_trudinger_functional<U: ScalarField + ?Sized>(u: &U, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::pre(format!("p must be positive, got {p}")));
    }
    let res = polar_integrate(
        |y| (p * u.value(y).abs()).exp(),
        Vec2::ZERO,
        0.5,
        &u.singular_points(),
        PolarTolerance::default(),
    );
    Ok(res.value)
}

/// `‖g‖_{L^p(D_radius(center))}` for a vector field `g` (typically a
/// gradient).
pub fn gradient_lp_norm(
    grad: impl Fn(Vec2) -> Vec2,
    center: Vec2,
    radius: f64,
    p: f64,
    singular: &[Vec2],
) -> Result<f64> {
    if !(p >= 1.0) || !(radius > 0.0) {
        return Err(Error::pre(format!("need p ≥ 1 and radius > 0 (p={p}, r={radius})")));
    }
    let res = polar_integrate(
        |y| grad(y).norm().powf(p),
        center,
        radius,
        singular,
        PolarTolerance::default(),
    );
    Ok(res.value.powf(1.0 / p))
}

/// Outcome of [`harmonic_residual_report`].
#[derive(Clone, Debug)]
pub struct HarmonicResidual {
    /// `|mean_{∂D_s(c)} w − w(c)|` per admissible circle, in input order.
    pub deviations: Vec<(Vec2, f64, f64)>,
    pub max_deviation: f64,
    pub skipped: usize,
}

const CIRCLE_SAMPLES: usize = 512;

/// Mean-value test of `w = u − I_μ` on the given circles. Circles whose
/// closed disk contains an atom of `μ` are skipped.
pub fn harmonic_residual_report<U: ScalarField + ?Sized>(
    u: &U,
    mu: &SignedMeasure,
    circles: &[(Vec2, f64)],
) -> Result<HarmonicResidual> {
    let field = PotentialField::new(mu.clone());
    let w = |x: Vec2| u.value(x) - field.value_unchecked(x);
    let mut deviations = Vec::new();
    let mut skipped = 0;
    for &(c, s) in circles {
        let hits_atom = mu.atoms().iter().any(|a| a.pos.dist(c) <= s);
        if !(s > 0.0) || hits_atom {
            skipped += 1;
            continue;
        }
        let mean = (0..CIRCLE_SAMPLES)
            .map(|k| w(c + Vec2::polar(s, 2.0 * PI * k as f64 / CIRCLE_SAMPLES as f64)))
            .sum::<f64>()
            / CIRCLE_SAMPLES as f64;
        let centre = w(c);
        if !mean.is_finite() || !centre.is_finite() {
            skipped += 1;
            continue;
        }
        deviations.push((c, s, (mean - centre).abs()));
    }
    if deviations.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let max_deviation = deviations.iter().map(|d| d.2).fold(0.0, f64::max);
    Ok(HarmonicResidual {
        deviations,
        max_deviation,
        skipped,
    })
}

/// Smooth compactly supported bump `exp(−1/(1 − |x−c|²/s²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: Vec2,
    pub radius: f64,
}

impl Bump {
    pub fn value(&self, x: Vec2) -> f64 {
        let rho2 = (x - self.center).norm_sq() / (self.radius * self.radius);
        if rho2 >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - rho2)).exp()
        }
    }

    /// Analytic Laplacian.
    pub fn laplacian(&self, x: Vec2) -> f64 {
        let rho2 = (x - self.center).norm_sq() / (self.radius * self.radius);
        if rho2 >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - rho2;
        let psi = (-1.0 / q).exp();
        let (q2, q3, q4) = (q * q, q * q * q, q * q * q * q);
        psi * (-4.0 / q2 + 4.0 * rho2 / q4 - 8.0 * rho2 / q3) / (self.radius * self.radius)
    }

    pub fn sup_norm(&self) -> f64 {
        (-1.0f64).exp()
    }
}

/// Weak-form residual `∫ I_μ Δφ dx + ∫ φ dμ` for a bump `φ`, with the
/// first integral on an `n×n` cell grid over the bump's bounding square.
/// Cells containing atoms integrate the log kernel exactly.
pub fn weak_residual(mu: &SignedMeasure, bump: &Bump, n: usize) -> f64 {
    let field = PotentialField::new(mu.clone());
    let lo = bump.center - Vec2::new(bump.radius, bump.radius);
    let h = 2.0 * bump.radius / n as f64;
    let lhs = par::sum_range(n * n, |k| {
        let (i, j) = (k % n, k / n);
        let a = lo + Vec2::new(i as f64 * h, j as f64 * h);
        let b = a + Vec2::new(h, h);
        let lap = bump.laplacian((a + b) * 0.5);
        if lap == 0.0 {
            0.0
        } else {
            lap * field.cell_integral(a, b)
        }
    });
    lhs + mu.integrate(|x| bump.value(x))
}
