//! Cross-module invariants through the public API.

use std::f64::consts::PI;

use conflab::collar::{collar_distance, collar_from_length, max_collar_length};
use conflab::disk::{area_bound_audit, ConformalField, Domain};
use conflab::harness::{self, DiskAreaSection, ExperimentConfig, Kind};
use conflab::potential::{eval_potential, scaling_functional};
use conflab::torus::{solve_poisson, torus_distance, Lattice};
use conflab::{par, SignedMeasure, Vec2};
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.5..0.5f64, -0.5..0.5f64, -3.0..3.0f64), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn translated_measure_translates_potential(a in atoms(), tx in -1.0..1.0f64, ty in -1.0..1.0f64) {
        let mu = SignedMeasure::atomic(a.iter().map(|&(x, y, w)| (Vec2::new(x, y), w))).unwrap();
        let t = Vec2::new(tx, ty);
        let x = Vec2::new(0.917, -0.733);
        let v0 = eval_potential(&mu, x).unwrap();
        let v1 = eval_potential(&mu.translate(t), x + t).unwrap();
        prop_assert!((v0 - v1).abs() <= 1e-10 * (1.0 + v0.abs()));
    }

    #[test]
    fn collar_distance_is_additive(ell in 1e-3..max_collar_length(), s in 0.0..1.0f64, u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let p = collar_from_length(ell).unwrap();
        let mut t = [s, u, v].map(|z| (2.0 * z - 1.0) * p.t_max);
        t.sort_by(f64::total_cmp);
        let d = |a: f64, b: f64| collar_distance(&p, a, b).unwrap();
        let lhs = d(t[0], t[1]) + d(t[1], t[2]);
        prop_assert!((lhs - d(t[0], t[2])).abs() <= 1e-9 * (1.0 + lhs));
    }

    #[test]
    fn torus_distance_ignores_lattice_translates(b in 1.0..8.0f64, x in 0.0..1.0f64, y in 0.0..1.0f64, m in -3i32..3, n in -3i32..3) {
        let l = Lattice::rectangular(b).unwrap();
        let p = Vec2::new(0.1, 0.2);
        let q = l.point(x, y);
        let shifted = q + l.point(m as f64, n as f64);
        prop_assert!((torus_distance(&l, p, q) - torus_distance(&l, p, shifted)).abs() < 1e-12);
    }

    #[test]
    fn random_curvature_respects_its_bounds(seed in 0u64..1000) {
        let s = DiskAreaSection { grid: 129, ..DiskAreaSection::default() };
        let mut rng = harness::rng_for(seed, Kind::DiskArea);
        let mu = harness::random_curvature(&s, &mut rng).unwrap();
        let (pos, neg) = mu.jordan_decompose();
        prop_assert!(neg.total_variation() <= s.max_negative_mass + 1e-12);
        prop_assert!(pos.atoms().iter().all(|a| a.weight <= s.max_positive_weight));
        let h = 2.0 / (s.grid - 1) as f64;
        for a in mu.atoms() {
            prop_assert!(a.pos.norm() < s.support_radius + h);
            // half a cell away from every node line
            let off = |c: f64| ((c + 1.0) / h).fract();
            prop_assert!((off(a.pos.x) - 0.5).abs() < 1e-6 && (off(a.pos.y) - 0.5).abs() < 1e-6);
        }
    }
}

#[test]
fn chunked_sums_do_not_depend_on_thread_count() {
    let f = |k: usize| ((k as f64) * 0.37).sin() / (1.0 + k as f64);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| par::sum_range(1_000_003, f));
    let b = four.install(|| par::sum_range(1_000_003, f));
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn torus_solution_is_independent_of_thread_count() {
    let mu = SignedMeasure::atomic([(Vec2::new(0.25, 0.5), 1.0), (Vec2::new(0.75, 0.5), -1.0)]).unwrap();
    let l = Lattice::rectangular(2.0).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| solve_poisson(&l, &mu, 64).unwrap());
    let b = four.install(|| solve_poisson(&l, &mu, 64).unwrap());
    assert_eq!(a.u, b.u);
    assert_eq!(a.grad_x, b.grad_x);
}

#[test]
fn negative_cone_ball_about_apex_matches_cone_angle() {
    // 𝕂 = −(π/2)δ: cone angle 5π/2, apex ball ratio 1.25
    let mu = SignedMeasure::dirac(Vec2::new(0.5 / 256.0, 0.5 / 256.0), -PI / 2.0).unwrap();
    let disk = Domain::Disk {
        center: Vec2::ZERO,
        radius: 1.0,
    };
    let f = ConformalField::from_potential(&mu, -1.0, 1.0, 257, disk).unwrap();
    let audit = area_bound_audit(&f, &mu, &[(Vec2::ZERO, 0.3), (Vec2::new(0.4, 0.0), 0.2)]).unwrap();
    assert!((audit.bound - 1.25).abs() < 1e-12);
    let apex = audit.balls[0].ratio.unwrap();
    assert!((apex - 1.25).abs() < 0.05, "{apex}");
    assert!(audit.passed());
}

#[test]
fn scale_invariance_holds_off_centre() {
    // the functional of a dilated measure about the dilated point is unchanged
    let mu = SignedMeasure::atomic([(Vec2::new(0.1, 0.0), 1.0), (Vec2::new(-0.2, 0.15), -0.7)]).unwrap();
    let x = Vec2::new(0.05, 0.05);
    for lambda in [0.25, 4.0] {
        let a = scaling_functional(&mu, x, 0.5, 1.5).unwrap();
        let b = scaling_functional(&mu.dilate(lambda), x * lambda, 0.5 * lambda, 1.5).unwrap();
        assert!((a - b).abs() <= 1e-6 * a, "{a} {b}");
    }
}

#[test]
fn harness_rows_reference_their_library_values() {
    let cfg = ExperimentConfig::from_toml("[collar]\nell = [0.01]\nratio_samples = 10\nstrip_ell = []\n").unwrap();
    let rows = harness::run(&cfg, Kind::Collar).unwrap();
    let d = rows.iter().find(|r| r.experiment == "collar.distance").unwrap();
    assert!(d.value <= 1e-8 && d.pass);
    let p = collar_from_length(0.01).unwrap();
    let w = rows.iter().find(|r| r.experiment == "collar.asymptotic.width").unwrap();
    assert!((w.value - (p.w - (4.0f64 / 0.01).ln()).abs()).abs() < 1e-15);
}
