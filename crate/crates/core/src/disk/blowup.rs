//! The metric `e^{2x¹}|dx|²` and its geodesic-polar region
//! `Ω(R) = {(r, θ): 0 < r < T(θ)}` with `e^{T(θ) cos θ} = 1 + R cos θ`.
//!
//! `Ω(R)` is the set reached by the rays `θ` within `e^{2x¹}`-length `R`;
//! its area grows faster than `πR²`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{integrate, Tolerance};

/// Samples per direction of the 2-D midpoint cross-check.
const POLAR_SAMPLES: usize = 4096;

/// `T(θ) = log(1 + R cos θ)/cos θ`.
pub fn blowup_t(theta: f64, big_r: f64) -> Result<f64> {
    let c = theta.cos();
    if !(theta.abs() < FRAC_PI_2 && c > 0.0) {
        return Err(Error::pre(format!("θ must lie in (−π/2, π/2), got {theta}")));
    }
    if !(big_r > 0.0) {
        return Err(Error::pre(format!("R must be positive, got {big_r}")));
    }
    Ok((big_r * c).ln_1p() / c)
}

/// `∫_0^{T(θ)} e^{2rc} r dr` in closed form, `c = cos θ`.
fn closed_integrand(theta: f64, big_r: f64) -> f64 {
    let c = theta.cos();
    let t = (big_r * c).ln_1p() / c;
    let q = (big_r * c + 1.0).powi(2);
    q * t / (2.0 * c) - (q - 1.0) / (4.0 * c * c)
}

/// Area of `Ω(R)` restricted to `|θ| < π/2 − a`, computed twice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupArea {
    /// Adaptive quadrature in `θ` of the exact radial integral.
    pub closed: f64,
    /// Midpoint rule on a 4096 × 4096 polar grid.
    pub quadrature: f64,
}

impl BlowupArea {
    pub fn relative_gap(&self) -> f64 {
        (self.closed - self.quadrature).abs() / self.closed.abs()
    }
}

fn check(big_r: f64, a: f64) -> Result<()> {
    if !(big_r > 0.0) {
        return Err(Error::pre(format!("R must be positive, got {big_r}")));
    }
    if !(a > 0.0 && a < FRAC_PI_2) {
        return Err(Error::pre(format!("sector cutoff must lie in (0, π/2), got {a}")));
    }
    Ok(())
}

fn theta_integral(f: impl FnMut(f64) -> f64, a: f64) -> f64 {
    integrate(
        f,
        -FRAC_PI_2 + a,
        FRAC_PI_2 - a,
        &[0.0],
        Tolerance::new(0.0, 1e-13, 2000),
    )
    .value
}

pub fn blowup_area(big_r: f64, a: f64) -> Result<BlowupArea> {
    check(big_r, a)?;
    let closed = theta_integral(|th| closed_integrand(th, big_r), a);

    let (lo, hi) = (-FRAC_PI_2 + a, FRAC_PI_2 - a);
    let dth = (hi - lo) / POLAR_SAMPLES as f64;
    let quadrature = par::sum_range(POLAR_SAMPLES, |k| {
        let th = lo + (k as f64 + 0.5) * dth;
        let c = th.cos();
        let t = (big_r * c).ln_1p() / c;
        let dr = t / POLAR_SAMPLES as f64;
        let mut acc = 0.0;
        for m in 0..POLAR_SAMPLES {
            let r = (m as f64 + 0.5) * dr;
            acc += (2.0 * r * c).exp() * r;
        }
        acc * dr * dth
    });
    Ok(BlowupArea { closed, quadrature })
}

/// Leading term `R² ∫ (½ log(1 + R cos θ) − ¼) dθ`.
pub fn blowup_main_term(big_r: f64, a: f64) -> Result<f64> {
    check(big_r, a)?;
    let i = theta_integral(|th| 0.5 * (big_r * th.cos()).ln_1p() - 0.25, a);
    Ok(big_r * big_r * i)
}

/// `(closed − main term)/(R log R)`.
pub fn blowup_kappa(big_r: f64, a: f64) -> Result<f64> {
    if !(big_r > 1.0) {
        return Err(Error::pre(format!("R must exceed 1, got {big_r}")));
    }
    let closed = theta_integral(|th| closed_integrand(th, big_r), a);
    let main = blowup_main_term(big_r, a)?;
    Ok((closed - main) / (big_r * big_r.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn t_examples() {
        assert!((blowup_t(0.0, E - 1.0).unwrap() - 1.0).abs() < 1e-15);
        for k in 0..50 {
            let th = -1.5 + 3.0 * k as f64 / 49.0;
            for &r in &[0.1, 10.0, 1e4] {
                let t = blowup_t(th, r).unwrap();
                let lhs = (t * th.cos()).exp();
                let rhs = r * th.cos() + 1.0;
                assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            }
        }
        let t = blowup_t(FRAC_PI_2 - 1e-9, 3.0).unwrap();
        assert!((t - 3.0).abs() < 1e-7);
        assert!(blowup_t(FRAC_PI_2, 3.0).is_err());
        assert!(blowup_t(-FRAC_PI_2, 3.0).is_err());
    }

    #[test]
    fn closed_integrand_matches_radial_quadrature() {
        for &th in &[0.0, 0.7, -1.2] {
            let t = blowup_t(th, 10.0).unwrap();
            let q = integrate(
                |r| (2.0 * r * th.cos()).exp() * r,
                0.0,
                t,
                &[],
                Tolerance::default(),
            )
            .value;
            assert!((q - closed_integrand(th, 10.0)).abs() < 1e-10 * q);
        }
    }

    #[test]
    fn closed_and_polar_quadrature_agree() {
        let b = blowup_area(10.0, 0.1).unwrap();
        assert!(b.relative_gap() < 5e-3, "{b:?}");
    }

    #[test]
    fn area_ratio_increases() {
        let ratios: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&r| {
                let c = theta_integral(|th| closed_integrand(th, r), 0.1);
                c / (PI * r * r)
            })
            .collect();
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2], "{ratios:?}");
    }

    #[test]
    fn remainder_is_of_order_r_log_r() {
        // ∫ sec θ over the sector is 2 log cot(a/2) ≈ 5.99 for a = 0.1
        let k: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&r| blowup_kappa(r, 0.1).unwrap())
            .collect();
        let (lo, hi) = k.iter().fold((f64::MAX, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(lo > 0.0 && hi / lo < 2.0, "{k:?}");
    }
}
