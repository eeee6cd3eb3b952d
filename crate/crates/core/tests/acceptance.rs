//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use conflab::collar::{
    annulus_estimate_audit, asymptotic_residuals, collar_distance, collar_from_length,
    random_ratio_samples, ratio_bound_audit, AsymptoticResiduals,
};
use conflab::disk::{area_bound_audit, blowup_area, blowup_kappa, ConformalField, Domain};
use conflab::harness::{self, DiskAreaSection, ExperimentConfig, Kind};
use conflab::potential::{exp_integrability, gradient_lp_norm, scaling_functional, weak_residual, Bump};
use conflab::quadrature::{integrate, Tolerance};
use conflab::torus::{degenerate_family_audit, FamilyOptions};
use conflab::{SignedMeasure, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn delta() -> SignedMeasure {
    SignedMeasure::dirac(Vec2::ZERO, 1.0).unwrap()
}

fn weak_solution() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mu = delta();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let radius = rng.gen_range(0.3..1.0);
        let center = Vec2::polar(0.5 * radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
        let b = Bump { center, radius };
        worst = worst.max(weak_residual(&mu, &b, 1024).abs() / b.sup_norm());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-3 && secs < 10.0,
        format!("max |∫I_μΔφ + ∫φdμ|/‖φ‖ = {worst:.3e} (≤ 1e-3), {secs:.2} s (< 10 s)"),
    )
}

fn scale_invariance() -> Outcome {
    let mu = delta();
    let mut spread: f64 = 0.0;
    let mut q1: f64 = 0.0;
    for q in [1.0, 1.5] {
        let v: Vec<f64> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&r| scaling_functional(&mu, Vec2::ZERO, r, q).unwrap())
            .collect();
        let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        spread = spread.max(hi - lo);
        if q == 1.0 {
            q1 = v.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
        }
    }
    check(
        spread <= 1e-6 && q1 <= 1e-4,
        format!("spread over r = {spread:.3e} (≤ 1e-6), |F−1| at q=1 = {q1:.3e} (≤ 1e-4)"),
    )
}

fn exp_growth() -> Outcome {
    let mu = delta();
    let eps = 2.0 * PI;
    let v = |r: f64| exp_integrability(&mu, r, eps).unwrap();
    let unit = v(1.0);
    let bound = 2f64.powf(eps / (2.0 * PI)) * 1.05;
    let ratios: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|&r| v(2.0 * r) / v(r)).collect();
    let unit_ok = (unit - 2.0 * PI).abs() <= 0.01 * 2.0 * PI;
    let growth_ok = ratios.iter().all(|&x| x <= bound);
    check(
        unit_ok && growth_ok,
        format!(
            "value(1) = {unit:.6} (2π ± 1%: {}), value(2R)/value(R) for R = 1, 2, 4: {:.4?} (≤ {bound:.3}: {})",
            if unit_ok { "ok" } else { "no" },
            ratios,
            if growth_ok { "ok" } else { "no" }
        ),
    )
}

fn area_audit() -> Outcome {
    let start = Instant::now();
    let s = DiskAreaSection::default();
    assert_eq!((s.measures, s.grid), (20, 512));
    let mut rng = harness::rng_for(2024, Kind::DiskArea);
    let domain = Domain::Disk {
        center: Vec2::ZERO,
        radius: 1.0,
    };
    let (mut worst_excess, mut balls, mut unresolved, mut failures) = (f64::NEG_INFINITY, 0, 0, Vec::new());
    for i in 0..s.measures {
        let mu = harness::random_curvature(&s, &mut rng).unwrap();
        let neg = mu.jordan_decompose().1.total_variation();
        assert!(neg <= PI + 1e-12);
        let mut centres: Vec<Vec2> = (0..s.centers)
            .map(|_| Vec2::polar(s.support_radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        // the cone points themselves are the extreme centres
        centres.extend(mu.atoms().iter().map(|a| a.pos));
        let samples: Vec<(Vec2, f64)> = centres
            .iter()
            .flat_map(|&c| s.radii.iter().map(move |&r| (c, r)))
            .collect();
        let f = ConformalField::from_potential(&mu, -1.0, 1.0, s.grid, domain).unwrap();
        let audit = area_bound_audit(&f, &mu, &samples).unwrap();
        balls += audit.balls.iter().filter(|b| b.ratio.is_some() && b.resolved()).count();
        unresolved += audit.unresolved;
        if let Some(w) = audit.worst_ratio {
            worst_excess = worst_excess.max(w - audit.bound);
        }
        if !audit.passed() {
            failures.push(i);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        failures.is_empty() && secs < 120.0,
        format!(
            "{balls} unclipped resolved balls over 20 measures ({unresolved} under-resolved skipped), max(ratio − (1 + 𝕂⁻/2π)) = {worst_excess:.4} (≤ 0.05), failing measures {failures:?}, {secs:.1} s (< 120 s)"
        ),
    )
}

fn blowup() -> Outcome {
    let a = 0.1;
    let gap = blowup_area(10.0, a).unwrap().relative_gap();
    let radii = [10.0, 100.0, 1000.0];
    let ratios: Vec<f64> = radii
        .iter()
        .map(|&r| blowup_area(r, a).unwrap().closed / (PI * r * r))
        .collect();
    let kappas: Vec<f64> = radii.iter().map(|&r| blowup_kappa(r, a).unwrap()).collect();
    let kspread = kappas.iter().cloned().fold(f64::MIN, f64::max) / kappas.iter().cloned().fold(f64::MAX, f64::min);
    let increasing = ratios.windows(2).all(|w| w[0] < w[1]);
    check(
        gap <= 5e-3 && increasing && kspread < 2.0,
        format!("gap at R=10 {gap:.2e} (≤ 5e-3), ratios {ratios:.4?}, κ {kappas:.3?} spread {kspread:.3} (< 2)"),
    )
}

fn torus_family() -> Outcome {
    let opts = FamilyOptions::default();
    assert_eq!(opts.radii, vec![0.05, 0.1, 0.2, 1.0, 3.0]);
    let b = [1.0, 4.0, 16.0];
    let one = degenerate_family_audit(&b, 1.0, &opts).unwrap();
    let three_halves = degenerate_family_audit(&b, 1.5, &opts).unwrap();
    // p = 1: the normalized norm is ∫_{B_r}|∇u| / (r·|μ|)
    let plain_ok = one
        .rows
        .iter()
        .all(|r| (r.normalized - r.integral / (r.r * 2.0)).abs() <= 1e-12 * r.normalized);
    check(
        plain_ok && one.spread() <= 10.0 && three_halves.spread() <= 10.0,
        format!(
            "spread p=1 {:.3} in [{:.3}, {:.3}], p=1.5 {:.3} in [{:.3}, {:.3}] (≤ 10)",
            one.spread(),
            one.min(),
            one.max(),
            three_halves.spread(),
            three_halves.min(),
            three_halves.max()
        ),
    )
}

fn collar() -> Outcome {
    let ells = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut dist_gap: f64 = 0.0;
    for &ell in &ells {
        let p = collar_from_length(ell).unwrap();
        let t = p.t_max;
        for &(a, b) in &[(0.0, 1.0), (-5.0, 7.5), (t - 10.0, t - 0.5), (0.5 - t, t - 0.5)] {
            let q = integrate(|x| p.lambda / (p.lambda * x).cos(), a, b, &[], Tolerance::default()).value;
            dist_gap = dist_gap.max((collar_distance(&p, a, b).unwrap() - q).abs());
        }
    }
    let fit = asymptotic_residuals(&collar_from_length(ells[0]).unwrap()).unwrap().as_array();
    let kappa = fit.map(|x| x / ells[0]);
    let mut worst = [0.0f64; 4];
    for &ell in &ells {
        let r = asymptotic_residuals(&collar_from_length(ell).unwrap()).unwrap().as_array();
        for i in 0..4 {
            worst[i] = worst[i].max(r[i] / (kappa[i] * ell));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ratio_ok = true;
    let mut extreme: f64 = 0.0;
    for &ell in &ells {
        let p = collar_from_length(ell).unwrap();
        let samples = random_ratio_samples(&p, 10_000, &mut rng);
        let a = ratio_bound_audit(&p, &samples);
        ratio_ok &= a.passed() && a.evaluated == 10_000;
        extreme = extreme.max(a.max_ratio).max(1.0 / a.min_ratio);
    }
    let asym_ok = worst.iter().all(|&w| w <= 1.0);
    let names = AsymptoticResiduals::NAMES;
    check(
        dist_gap <= 1e-8 && asym_ok && ratio_ok,
        format!(
            "distance gap {dist_gap:.2e} (≤ 1e-8), residual/κℓ max {} (≤ 1), ratio extreme {extreme:.3} (< e² = {:.3})",
            names
                .iter()
                .zip(worst)
                .map(|(n, w)| format!("{n}={w:.3}"))
                .collect::<Vec<_>>()
                .join(" "),
            2f64.exp()
        ),
    )
}

fn dyadic() -> Outcome {
    let exact = [1.0, 3.5, 0.125].iter().all(|&c| annulus_estimate_audit(0.0, 1.0, c).unwrap() == c);
    let finite = (0..1000).all(|i| {
        let p = 1.0 + i as f64 / 1000.0;
        annulus_estimate_audit(0.0, p, 1.0).is_ok_and(f64::is_finite)
            && annulus_estimate_audit(1.0 / 1024.0, p, 1.0).is_ok_and(f64::is_finite)
    });
    let rejects = [2.0, 2.5, 10.0].iter().all(|&p| annulus_estimate_audit(0.0, p, 1.0).is_err());
    check(
        exact && finite && rejects,
        format!("(p=1, a=0) exact: {exact}, finite on p ∈ [1, 2): {finite}, p ≥ 2 rejected: {rejects}"),
    )
}

fn counterexample() -> Outcome {
    let ks = [1.0, 2.0, 10.0, 100.0, 1e4];
    let norms: Vec<f64> = ks
        .iter()
        .map(|&k| gradient_lp_norm(|_| Vec2::new(k, 0.0), Vec2::ZERO, 0.5, 1.0, &[]).unwrap())
        .collect();
    let err = ks
        .iter()
        .zip(&norms)
        .map(|(k, v)| (v - k * FRAC_PI_4).abs() / (k * FRAC_PI_4))
        .fold(0.0, f64::max);
    let slopes: Vec<f64> = ks.iter().zip(&norms).map(|(k, v)| v / k).collect();
    check(
        err <= 1e-12,
        format!("max relative error vs kπ/4 = {err:.2e}; ‖∇u_k‖/k = {:.12} for every k", slopes[0]),
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig::default();
    let csv = || {
        let rows = harness::run_all(&cfg).unwrap();
        let mut buf = Vec::new();
        harness::write_csv(&rows, &mut buf, false).unwrap();
        (rows.len(), buf)
    };
    let (n, a) = csv();
    let (_, b) = csv();
    check(a == b, format!("two `all` runs, {n} rows, {} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("potential weak solution", weak_solution),
        ("scale invariance of the gradient functional", scale_invariance),
        ("exponential integrability growth", exp_growth),
        ("quadratic area bound", area_audit),
        ("area blow-up of e^{2x}", blowup),
        ("flat-torus uniform gradient constant", torus_family),
        ("collar closed forms", collar),
        ("dyadic assembly", dyadic),
        ("affine counterexample", counterexample),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let el = fmt_duration(t.elapsed());
        match outcome {
            Ok(d) => println!("PASS criterion {}: {name}: {d} [{el}]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {d} [{el}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {}",
        criteria.len() - failed,
        criteria.len(),
        fmt_duration(total.elapsed())
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn fmt_duration(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}
