//! Row producers, one per experiment kind.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::{
    AnnulusSection, BlowupSection, CollarSection, DiskAreaSection, PotentialSection, TorusSection,
};
use super::ResultRow;
use crate::collar::{
    annulus_estimate_audit, asymptotic_residuals, collar_distance, collar_from_length,
    collar_strip_gradient_audit, random_ratio_samples, ratio_bound_audit, solve_cylinder,
    AsymptoticResiduals,
};
use crate::disk::{area_bound_audit, blowup_area, blowup_kappa, ConformalField, Domain, AREA_MARGIN};
use crate::error::Result;
use crate::geom::Vec2;
use crate::measure::SignedMeasure;
use crate::par;
use crate::potential::{
    exp_integrability, gradient_lp_norm, scaling_functional, weak_residual, Bump,
};
use crate::quadrature::{integrate, Tolerance};
use crate::torus::{degenerate_family_audit, FamilyOptions};

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64() * 1e3)
}

fn row(experiment: &str, params: &[(&str, f64)], value: f64, bound: f64, pass: bool, ms: f64) -> ResultRow {
    ResultRow {
        experiment: experiment.to_string(),
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        value,
        bound,
        pass,
        ms: Some(ms),
    }
}

/// Weak form, scale invariance and exponential integrability of `I_{δ_0}`.
pub(super) fn potential(s: &PotentialSection, rng: &mut ChaCha8Rng) -> Result<Vec<ResultRow>> {
    let delta = SignedMeasure::dirac(Vec2::ZERO, 1.0)?;
    let mut rows = Vec::new();

    // bumps whose support contains the atom
    let bumps: Vec<Bump> = (0..s.bumps)
        .map(|_| {
            let radius = rng.gen_range(0.3..1.0);
            let off = Vec2::polar(0.5 * radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
            Bump { center: off, radius }
        })
        .collect();
    let weak = par::map(&bumps, |b| timed(|| weak_residual(&delta, b, s.weak_grid).abs() / b.sup_norm()));
    for (i, (b, (v, ms))) in bumps.iter().zip(weak).enumerate() {
        rows.push(row(
            "potential.weak",
            &[
                ("bump", i as f64),
                ("cx", b.center.x),
                ("cy", b.center.y),
                ("radius", b.radius),
                ("grid", s.weak_grid as f64),
            ],
            v,
            s.weak_tolerance,
            v <= s.weak_tolerance,
            ms,
        ));
    }

    let pairs: Vec<(f64, f64)> = s
        .q
        .iter()
        .flat_map(|&q| s.scaling_radii.iter().map(move |&r| (q, r)))
        .collect();
    let scaled = par::map(&pairs, |&(q, r)| timed(|| scaling_functional(&delta, Vec2::ZERO, r, q)));
    let mut first: Option<(f64, f64)> = None;
    for (&(q, r), (v, ms)) in pairs.iter().zip(scaled) {
        let v = v?;
        let reference = match first {
            Some((fq, fv)) if fq == q => fv,
            _ => {
                first = Some((q, v));
                v
            }
        };
        // ∫_{D_r} (2π|x|)^{−q} dx · r^{q−2}
        let closed = (2.0 * PI).powf(1.0 - q) / (2.0 - q);
        let pass = (v - reference).abs() <= s.scaling_tolerance && (v - closed).abs() <= 1e-4 * closed;
        rows.push(row("potential.scaling", &[("q", q), ("r", r)], v, closed, pass, ms));
    }

    if !s.exp_radii.is_empty() {
        let mut radii: Vec<f64> = s.exp_radii.iter().flat_map(|&r| [r, 2.0 * r]).collect();
        radii.push(1.0);
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let values = par::map(&radii, |&r| timed(|| exp_integrability(&delta, r, s.eps)));
        let mut table = Vec::with_capacity(radii.len());
        for (&r, (v, ms)) in radii.iter().zip(values) {
            table.push((r, v?, ms));
        }
        let at = |r: f64| *table.iter().find(|e| e.0 == r).expect("radius in table");
        // ∫_{D_1} |x|^{−(4π−ε)/2π} dx
        let unit_closed = 4.0 * PI * PI / s.eps;
        let (_, v1, ms1) = at(1.0);
        rows.push(row(
            "potential.exp_unit",
            &[("eps", s.eps), ("R", 1.0)],
            v1,
            unit_closed,
            (v1 - unit_closed).abs() <= 0.01 * unit_closed,
            ms1,
        ));
        let bound = 2f64.powf(s.eps / (2.0 * PI)) * s.exp_growth_slack;
        for &r in &s.exp_radii {
            let (_, a, ma) = at(r);
            let (_, b, mb) = at(2.0 * r);
            let ratio = b / a;
            rows.push(row(
                "potential.exp_growth",
                &[("eps", s.eps), ("R", r)],
                ratio,
                bound,
                ratio <= bound,
                ma + mb,
            ));
        }
    }
    Ok(rows)
}

/// Centre of the node-grid cell containing `x`, so that atoms never sit on
/// nodes.
fn snap_to_cell(x: f64, lo: f64, h: f64) -> f64 {
    lo + h * (((x - lo) / h).floor() + 0.5)
}

fn uniform_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Vec2 {
    Vec2::polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI))
}

/// Random atomic curvature measure with `|𝕂⁻| ≤ max_negative_mass`.
pub fn random_curvature(s: &DiskAreaSection, rng: &mut ChaCha8Rng) -> Result<SignedMeasure> {
    let h = 2.0 / (s.grid - 1) as f64;
    let n = rng.gen_range(1..=s.max_atoms.max(1));
    let signs: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let negatives = signs.iter().filter(|&&neg| neg).count();
    let neg_mass = rng.gen_range(0.0..=s.max_negative_mass);
    let shares: Vec<f64> = (0..negatives).map(|_| rng.gen_range(0.1..1.0)).collect();
    let share_sum: f64 = shares.iter().sum();
    let mut shares = shares.into_iter();
    let mut atoms = Vec::with_capacity(n);
    for neg in signs {
        let p = uniform_in_disk(rng, s.support_radius);
        let p = Vec2::new(snap_to_cell(p.x, -1.0, h), snap_to_cell(p.y, -1.0, h));
        let w = if neg {
            -neg_mass * shares.next().expect("one share per negative atom") / share_sum
        } else {
            rng.gen_range(0.0..=s.max_positive_weight)
        };
        atoms.push((p, w));
    }
    SignedMeasure::atomic(atoms)
}

/// Quadratic area bound for `e^{2I_μ}` on the unit disk.
pub(super) fn disk_area(s: &DiskAreaSection, rng: &mut ChaCha8Rng) -> Result<Vec<ResultRow>> {
    let mut cases = Vec::with_capacity(s.measures);
    for _ in 0..s.measures {
        let mu = random_curvature(s, rng)?;
        let mut centres: Vec<Vec2> = (0..s.centers).map(|_| uniform_in_disk(rng, s.support_radius)).collect();
        centres.extend(mu.atoms().iter().map(|a| a.pos));
        let samples: Vec<(Vec2, f64)> = centres
            .iter()
            .flat_map(|&c| s.radii.iter().map(move |&r| (c, r)))
            .collect();
        cases.push((mu, samples));
    }
    let domain = Domain::Disk {
        center: Vec2::ZERO,
        radius: 1.0,
    };
    let audits = par::map(&cases, |(mu, samples)| {
        timed(|| {
            let f = ConformalField::from_potential(mu, -1.0, 1.0, s.grid, domain)?;
            area_bound_audit(&f, mu, samples)
        })
    });
    let mut rows = Vec::with_capacity(cases.len());
    for (i, ((mu, _), (audit, ms))) in cases.iter().zip(audits).enumerate() {
        let audit = audit?;
        let (pos, neg) = mu.jordan_decompose();
        rows.push(row(
            "disk-area",
            &[
                ("measure", i as f64),
                ("atoms", mu.atoms().len() as f64),
                ("neg_mass", neg.total_variation()),
                ("pos_mass", pos.total_variation()),
                ("grid", s.grid as f64),
            ],
            audit.worst_ratio.unwrap_or(f64::NAN),
            audit.bound + AREA_MARGIN,
            audit.passed(),
            ms,
        ));
    }
    Ok(rows)
}

/// Area of `Ω(R)` for `e^{2x¹}`: growth ratio, quadrature cross-check and
/// remainder constant.
pub(super) fn blowup(s: &BlowupSection) -> Result<Vec<ResultRow>> {
    let a = s.sector_cutoff;
    let results = par::map(&s.radii, |&r| {
        timed(|| -> Result<_> { Ok((blowup_area(r, a)?, blowup_kappa(r, a)?)) })
    });
    let mut table = Vec::with_capacity(results.len());
    for (&r, (v, ms)) in s.radii.iter().zip(results) {
        let (area, kappa) = v?;
        table.push((r, area, kappa, ms));
    }
    let kmin = table.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
    let mut rows = Vec::new();
    let mut prev = 0.0;
    for &(r, area, _, ms) in &table {
        let ratio = area.closed / (PI * r * r);
        rows.push(row("blowup", &[("R", r), ("a", a)], ratio, prev, ratio > prev, ms));
        prev = ratio;
    }
    for &(r, area, _, ms) in &table {
        let gap = area.relative_gap();
        rows.push(row(
            "blowup.quadrature",
            &[("R", r), ("a", a)],
            gap,
            s.quadrature_tolerance,
            gap <= s.quadrature_tolerance,
            ms,
        ));
    }
    let bound = s.kappa_spread * kmin;
    for &(r, _, kappa, ms) in &table {
        rows.push(row("blowup.kappa", &[("R", r), ("a", a)], kappa, bound, kappa < bound, ms));
    }
    Ok(rows)
}

/// Normalized ball norms of a fixed dipole across rectangular tori.
pub(super) fn torus(s: &TorusSection) -> Result<Vec<ResultRow>> {
    if s.b.is_empty() || s.radii.is_empty() {
        return Ok(Vec::new());
    }
    let opts = FamilyOptions {
        n: s.grid,
        radii: s.radii.clone(),
        anchor: Vec2::new(s.anchor_x, s.anchor_y),
    };
    let mut rows = Vec::new();
    for &p in &s.p {
        let (audit, ms) = timed(|| degenerate_family_audit(&s.b, p, &opts));
        let audit = audit?;
        let bound = s.spread * audit.min();
        let per_row = ms / audit.rows.len() as f64;
        for r in &audit.rows {
            rows.push(row(
                "torus",
                &[("p", p), ("b", r.b), ("r", r.r), ("grid", s.grid as f64)],
                r.normalized,
                bound,
                r.normalized <= bound,
                per_row,
            ));
        }
    }
    Ok(rows)
}

/// Closed-form collar geometry against quadrature and asymptotics, the
/// conformal-factor ratio bound, and strip gradient masses.
pub(super) fn collar(s: &CollarSection, rng: &mut ChaCha8Rng) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    if s.ell.is_empty() && s.strip_ell.is_empty() {
        return Ok(rows);
    }
    let fit = asymptotic_residuals(&collar_from_length(s.kappa_fit_ell)?)?.as_array();
    let kappa = fit.map(|r| r / s.kappa_fit_ell);

    let sample_sets: Vec<Vec<(f64, f64)>> = s
        .ell
        .iter()
        .map(|&ell| Ok(random_ratio_samples(&collar_from_length(ell)?, s.ratio_samples, rng)))
        .collect::<Result<_>>()?;

    let per_ell = par::map(&s.ell, |&ell| {
        timed(|| -> Result<_> {
            let p = collar_from_length(ell)?;
            let res = asymptotic_residuals(&p)?;
            let t = p.t_max;
            let mut gap: f64 = 0.0;
            for &(a, b) in &[(0.0, 1.0), (-5.0, 7.5), (t - 10.0, t - 0.5), (0.5 - t, t - 0.5)] {
                if !(a > -t && b < t) {
                    continue;
                }
                let q = integrate(|x| p.lambda / (p.lambda * x).cos(), a, b, &[], Tolerance::default());
                gap = gap.max((collar_distance(&p, a, b)? - q.value).abs());
            }
            Ok((res, gap))
        })
    });
    let mut computed: Vec<(f64, AsymptoticResiduals, f64, f64)> = Vec::new();
    for (&ell, (v, ms)) in s.ell.iter().zip(per_ell) {
        let (res, gap) = v?;
        computed.push((ell, res, gap, ms));
    }

    for (i, name) in AsymptoticResiduals::NAMES.iter().enumerate() {
        let id = format!("collar.asymptotic.{name}");
        for (ell, res, _, ms) in &computed {
            let v = res.as_array()[i];
            let bound = kappa[i] * ell;
            rows.push(row(&id, &[("ell", *ell)], v, bound, v <= bound, *ms));
        }
    }
    for (ell, _, gap, ms) in &computed {
        rows.push(row(
            "collar.distance",
            &[("ell", *ell)],
            *gap,
            s.distance_tolerance,
            *gap <= s.distance_tolerance,
            *ms,
        ));
    }
    for (&ell, samples) in s.ell.iter().zip(&sample_sets) {
        let p = collar_from_length(ell)?;
        let (audit, ms) = timed(|| ratio_bound_audit(&p, samples));
        let worst = audit.max_ratio.ln().abs().max(audit.min_ratio.ln().abs());
        rows.push(row(
            "collar.ratio",
            &[("ell", ell), ("samples", samples.len() as f64)],
            worst,
            audit.c0.ln(),
            audit.passed() && audit.rejected.is_empty(),
            ms,
        ));
    }

    for &ell in &s.strip_ell {
        let p = collar_from_length(ell)?;
        let source = [(0.0, 0.0, 1.0)];
        let sol = solve_cylinder(&p, &source, s.strip_modes)?;
        let pairs: Vec<(i64, i64)> = s.strip_k.iter().copied().zip(s.strip_m.iter().copied()).collect();
        let audits = par::map(&pairs, |&(k, m)| timed(|| collar_strip_gradient_audit(&p, &sol, k, m)));
        for (&(k, m), (a, ms)) in pairs.iter().zip(audits) {
            let a = a?;
            rows.push(row(
                "collar.strip",
                &[("ell", ell), ("k", k as f64), ("m", m as f64), ("modes", s.strip_modes as f64)],
                a.ratio,
                s.strip_bound,
                a.ratio <= s.strip_bound && a.strip_lengths_monotone,
                ms,
            ));
        }
    }
    Ok(rows)
}

/// Dyadic annulus sums and the affine counterexample family.
pub(super) fn annulus(s: &AnnulusSection) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &p in &s.p {
        for &a in &s.a {
            let (v, ms) = timed(|| annulus_estimate_audit(a, p, s.per_disk_bound));
            let v = v?;
            let q = 2f64.powf(p - 2.0);
            let reference = if a == 0.0 {
                s.per_disk_bound / (2f64.powf(2.0 - p) - 1.0)
            } else {
                let m = (-a.log2()).round() as i32;
                s.per_disk_bound * q * (1.0 - q.powi(m)) / (1.0 - q)
            };
            let pass = v.is_finite() && (v - reference).abs() <= 1e-12 * reference.abs();
            rows.push(row("annulus", &[("p", p), ("a", a)], v, reference, pass, ms));
        }
    }
    if !s.p.is_empty() {
        let (r, ms) = timed(|| annulus_estimate_audit(0.0, 2.0, s.per_disk_bound));
        rows.push(row("annulus.rejects_p2", &[("p", 2.0)], 2.0, 2.0, r.is_err(), ms));
    }

    if !s.k.is_empty() {
        let norms = par::map(&s.k, |&k| {
            timed(|| gradient_lp_norm(|_| Vec2::new(k, 0.0), Vec2::ZERO, 0.5, 1.0, &[]))
        });
        let mut table = Vec::with_capacity(s.k.len());
        for (&k, (v, ms)) in s.k.iter().zip(norms) {
            let v = v?;
            let exact = k.abs() * FRAC_PI_4;
            rows.push(row(
                "annulus.counterexample",
                &[("k", k)],
                v,
                exact,
                (v - exact).abs() <= 1e-12 * exact,
                ms,
            ));
            table.push((k.abs(), v));
        }
        // least-squares slope through the origin
        let slope = table.iter().map(|(k, v)| k * v).sum::<f64>() / table.iter().map(|(k, _)| k * k).sum::<f64>();
        rows.push(row(
            "annulus.counterexample_slope",
            &[],
            slope,
            FRAC_PI_4,
            (slope - FRAC_PI_4).abs() <= 1e-12,
            0.0,
        ));
    }
    Ok(rows)
}
