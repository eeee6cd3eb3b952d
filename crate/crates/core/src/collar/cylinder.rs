//! Potentials on the truncated collar cylinder `[−L, L] × S¹`, `L = T − 1`,
//! and their hyperbolic gradient mass over unit strips.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::{collar_distance, CollarParams};
use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::gauss_legendre;

type C64 = Complex<f64>;

/// A function on the cylinder that can report `|∇u|` (Euclidean, in
/// `(t, θ)`) on a ring of equispaced angles.
pub trait CylinderField: Sync {
    /// `|∇u(t, 2πk/n)|` for `k = 0..n`.
    fn ring_gradient(&self, t: f64) -> Vec<f64>;

    /// Values of `t` where `|∇u|` may have a kink.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Wraps an analytic gradient `(t, θ) ↦ (∂_t u, ∂_θ u)` sampled on `n` angles.
pub struct RingSampled<F> {
    pub grad: F,
    pub n: usize,
}

impl<F: Fn(f64, f64) -> (f64, f64) + Sync> CylinderField for RingSampled<F> {
    fn ring_gradient(&self, t: f64) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                let (a, b) = (self.grad)(t, 2.0 * PI * k as f64 / self.n as f64);
                a.hypot(b)
            })
            .collect()
    }
}

/// Dirichlet solution of `−Δu = μ_σ` on `[−L, L] × S¹` by separation of
/// variables, `u = Σ_n ĝ_n(t) e^{inθ}`. Atoms are mollified in `θ` by
/// `e^{−n²σ²/2}` with `σ` three angular cells.
pub struct CylinderSolution {
    pub half_length: f64,
    pub modes: usize,
    pub sigma: f64,
    atoms: Vec<(f64, f64, f64)>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CylinderSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CylinderSolution")
            .field("half_length", &self.half_length)
            .field("modes", &self.modes)
            .field("sigma", &self.sigma)
            .field("atoms", &self.atoms)
            .finish()
    }
}

/// Solves on the collar truncated at `|t| = T − 1` with `m` angular samples
/// (a power of two). `atoms` holds `(t, θ, weight)`.
pub fn solve_cylinder(p: &CollarParams, atoms: &[(f64, f64, f64)], m: usize) -> Result<CylinderSolution> {
    if m < 8 || !m.is_power_of_two() {
        return Err(Error::pre(format!("angular samples must be a power of two ≥ 8, got {m}")));
    }
    let l = p.t_max - 1.0;
    if !(l > 0.0) {
        return Err(Error::pre("collar too short for a truncated cylinder"));
    }
    if let Some(a) = atoms.iter().find(|a| !(a.0.abs() < l) || !a.2.is_finite()) {
        return Err(Error::pre(format!("atom at t = {} outside (−{l}, {l})", a.0)));
    }
    Ok(CylinderSolution {
        half_length: l,
        modes: m,
        sigma: 3.0 * 2.0 * PI / m as f64,
        atoms: atoms.to_vec(),
        fft: FftPlanner::new().plan_fft_inverse(m),
    })
}

impl CylinderSolution {
    /// `(G_n(t, t₀), ∂_t G_n(t, t₀))` for `−G'' + n²G = δ_{t₀}`, `G(±L) = 0`.
    fn green(&self, n: usize, t: f64, t0: f64) -> (f64, f64) {
        let l = self.half_length;
        let below = t < t0;
        let (lo, hi) = if below { (t, t0) } else { (t0, t) };
        if n == 0 {
            let g = (l + lo) * (l - hi) / (2.0 * l);
            let dg = if below { (l - t0) / (2.0 * l) } else { -(l + t0) / (2.0 * l) };
            return (g, dg);
        }
        let n = n as f64;
        let e = (-n * (hi - lo)).exp();
        let ea = (-2.0 * n * (l + lo)).exp();
        let eb = (-2.0 * n * (l - hi)).exp();
        let den = 1.0 - (-4.0 * n * l).exp();
        let g = e / (2.0 * n) * (1.0 - ea) * (1.0 - eb) / den;
        let dg = if below {
            0.5 * e * (1.0 - eb) * (1.0 + ea) / den
        } else {
            -0.5 * e * (1.0 - ea) * (1.0 + eb) / den
        };
        (g, dg)
    }

    /// Spectra of `u`, `∂_t u` and `∂_θ u` on the ring at `t`.
    fn spectra(&self, t: f64) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
        let m = self.modes;
        let mut u = vec![C64::default(); m];
        let mut ut = vec![C64::default(); m];
        let mut uth = vec![C64::default(); m];
        for &(t0, th0, wgt) in &self.atoms {
            for n in 0..m / 2 {
                let damp = (-0.5 * (n as f64 * self.sigma).powi(2)).exp();
                if damp < 1e-300 {
                    break;
                }
                let (g, dg) = self.green(n, t, t0);
                // μ̂_n = w e^{−inθ₀}/2π
                let c = C64::from_polar(wgt * damp / (2.0 * PI), -(n as f64) * th0);
                u[n] += c * g;
                ut[n] += c * dg;
                uth[n] += c * C64::new(0.0, n as f64) * g;
                if n > 0 {
                    u[m - n] += (c * g).conj();
                    ut[m - n] += (c * dg).conj();
                    uth[m - n] += (c * C64::new(0.0, n as f64) * g).conj();
                }
            }
        }
        (u, ut, uth)
    }

    /// `u` on the ring at `t`, at angles `2πk/m`.
    pub fn ring_values(&self, t: f64) -> Vec<f64> {
        let (mut u, _, _) = self.spectra(t);
        self.fft.process(&mut u);
        u.into_iter().map(|c| c.re).collect()
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }
}

impl CylinderField for CylinderSolution {
    fn ring_gradient(&self, t: f64) -> Vec<f64> {
        let (_, mut ut, mut uth) = self.spectra(t);
        self.fft.process(&mut ut);
        self.fft.process(&mut uth);
        ut.iter().zip(&uth).map(|(a, b)| a.re.hypot(b.re)).collect()
    }

    fn kinks(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }
}

/// Gauss points per unit strip (per sub-panel when a kink splits it).
const STRIP_ORDER: usize = 16;

/// Outcome of [`collar_strip_gradient_audit`].
#[derive(Clone, Debug)]
pub struct StripAudit {
    pub k: i64,
    pub m: i64,
    /// `∫_{[i, i+1]×S¹} |∇u| (λ/cos λt) dt dθ` for `i = k..m`.
    pub strips: Vec<f64>,
    pub integral: f64,
    pub distance: f64,
    /// `integral / d_{k,m}`.
    pub ratio: f64,
    /// Unit-strip lengths `∫_{i}^{i+1} λ sec λs ds` grow away from `t = 0`.
    pub strip_lengths_monotone: bool,
}

/// `∫_{[k,m]×S¹} |∇_g u| dV_g` for the collar metric, strip by strip,
/// against `d_{k,m}`.
pub fn collar_strip_gradient_audit<U: CylinderField + ?Sized>(
    p: &CollarParams,
    u: &U,
    k: i64,
    m: i64,
) -> Result<StripAudit> {
    let lim = p.t_max - 2.0;
    if !((-lim) < k as f64 && k < m && (m as f64) < lim) {
        return Err(Error::pre(format!(
            "need −T+2 < k < m < T−2 (T = {}), got k = {k}, m = {m}",
            p.t_max
        )));
    }
    let (x, wq) = gauss_legendre(STRIP_ORDER);
    let kinks = u.kinks();
    let strips: Vec<i64> = (k..m).collect();
    let values = par::map(&strips, |&i| {
        let (a, b) = (i as f64, (i + 1) as f64);
        let mut cuts = vec![a];
        cuts.extend(kinks.iter().copied().filter(|&c| c > a && c < b));
        cuts.push(b);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (xi, wi) in x.iter().zip(&wq) {
                let t = c + h * xi;
                let ring = u.ring_gradient(t);
                let mean = ring.iter().sum::<f64>() / ring.len() as f64;
                acc += wi * h * 2.0 * PI * mean * p.lambda / (p.lambda * t).cos();
            }
        }
        acc
    });
    let integral = values.iter().sum();
    let distance = collar_distance(p, k as f64, m as f64)?;
    let unit = |i: i64| collar_distance(p, i as f64, (i + 1) as f64);
    let mut strip_lengths_monotone = true;
    for i in k.max(1)..m {
        strip_lengths_monotone &= unit(i - 1)? <= unit(i)?;
    }
    for i in k..m.min(0) {
        strip_lengths_monotone &= unit(i)? >= unit(i + 1)?;
    }
    Ok(StripAudit {
        k,
        m,
        strips: values,
        integral,
        distance,
        ratio: integral / distance,
        strip_lengths_monotone,
    })
}
