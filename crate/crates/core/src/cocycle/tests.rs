use proptest::prelude::*;

use super::*;
use crate::rng::{stream, Purpose};
use crate::surface::{genus2, FuchsianGroup};
use crate::{Complex, Frame, MatC, SpherePoint};

fn g2() -> FuchsianGroup<f64> {
    genus2().unwrap()
}

fn start(g: &FuchsianGroup<f64>, i: u64) -> SkewState {
    initial_state(g, 42, i)
}

#[test]
fn zero_steps_is_identity() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    let s = start(&g, 0);
    assert_eq!(evolve(&g, &rep, &s, 0.05, 0).unwrap(), s);
}

#[test]
fn trivial_representation_freezes_fiber() {
    let g = g2();
    let rep = Representation::trivial(4);
    let s = start(&g, 1);
    let e = evolve(&g, &rep, &s, 0.05, 20_000).unwrap();
    assert_eq!(e.fiber, s.fiber);
    assert_eq!(e.log_deriv, 0.0);
}

#[test]
fn split_runs_are_bit_exact() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    let s = start(&g, 2);
    let k = 1_537;
    let once = evolve(&g, &rep, &s, 0.05, 2 * k).unwrap();
    let half = evolve(&g, &rep, &s, 0.05, k).unwrap();
    let twice = evolve(&g, &rep, &half, 0.05, k).unwrap();
    assert_eq!(once, twice);
}

#[test]
fn base_projection_ignores_representation() {
    let g = g2();
    let fu = Representation::fuchsian(&g);
    let un = Representation::unitary(&g).unwrap();
    let s = start(&g, 3);
    let a = evolve(&g, &fu, &s, 0.05, 5_000).unwrap();
    let b = evolve(&g, &un, &s, 0.05, 5_000).unwrap();
    assert_eq!(a.frame, b.frame);
    assert_eq!(a.time, b.time);
}

#[test]
fn base_orbit_is_the_reduced_geodesic() {
    // compare with the unreduced flow pushed into the domain afterwards
    let g = g2();
    let rep = Representation::trivial(4);
    let s = start(&g, 4);
    let n = 200;
    let e = evolve(&g, &rep, &s, 0.05, n).unwrap();
    let direct = s.frame.geodesic_advance(0.05 * n as f64);
    let (r, _) = g.reduce(&direct).unwrap();
    assert!((r.base_point() - e.base_point()).norm() < 1e-9);
    assert!(crate::hyperbolic::wrap_signed(r.direction() - e.frame.direction()).abs() < 1e-9);
}

#[test]
fn unitary_steps_contribute_exactly_zero() {
    let g = g2();
    let rep = Representation::unitary(&g).unwrap();
    let mut s = start(&g, 5);
    let mut moved = false;
    for _ in 0..2_000 {
        let next = evolve(&g, &rep, &s, 0.05, 1).unwrap();
        assert_eq!(next.log_deriv, 0.0);
        moved |= next.fiber != s.fiber;
        s = next;
    }
    assert!(moved);
    let est = transverse_lyapunov(&g, &rep, 1, 100.0, 0.05, 4).unwrap();
    assert_eq!(est.mean, 0.0);
    assert!(est.per_orbit.iter().all(|&v| v == 0.0));
    let triv = transverse_lyapunov(&g, &Representation::trivial(4), 1, 100.0, 0.05, 4).unwrap();
    assert_eq!(triv.mean, 0.0);
}

#[test]
fn relators_of_presets_hold() {
    let g = g2();
    assert!(Representation::fuchsian(&g).relator_residual(&g) < 1e-9);
    assert!(Representation::unitary(&g).unwrap().relator_residual(&g) < 1e-12);
    let q = Representation::quasi_fuchsian_like(&g, 0.3).unwrap();
    assert!(q.relator_residual(&g) < 1e-9);
    for m in q.images() {
        assert!((m.det() - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }
    // bending really leaves the real group
    assert!(q.images()[2].a.im.abs() + q.images()[2].b.im.abs() > 1e-3);
}

#[test]
fn log_derivative_matches_closed_form_holonomy() {
    // the chart change after time t is rho(w)^-1 = g_red a(-t) g_0^-1
    let g = g2();
    let rep = Representation::fuchsian(&g);
    for i in 0..5 {
        let s = start(&g, 10 + i);
        let n = 300;
        let dt = 0.05;
        let e = evolve(&g, &rep, &s, dt, n).unwrap();
        let t = dt * n as f64;
        let m = *e.frame.matrix() * crate::Mat2::diag((-0.5 * t).exp()) * s.frame.matrix().sl_inverse();
        let mc = MatC::from_real(&m);
        let oracle = mc.spherical_derivative(&s.fiber).ln();
        assert!((oracle - e.log_deriv).abs() < 1e-8, "{oracle} vs {}", e.log_deriv);
        assert!(mc.apply(&s.fiber).chordal_distance(&e.fiber) < 1e-9);
    }
}

#[test]
fn fiber_tracks_the_backward_endpoint() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    for i in 0..5 {
        let s = evolve(&g, &rep, &start(&g, 20 + i), 0.05, 800).unwrap();
        let target = s.frame.backward_endpoint().to_sphere();
        assert!(s.fiber.chordal_distance(&target) < 1e-9);
    }
}

#[test]
fn fuchsian_exponent_short_run() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    let est = transverse_lyapunov(&g, &rep, 7, 200.0, 0.05, 20).unwrap();
    assert!((est.mean + 1.0).abs() < 0.05, "mean {}", est.mean);
    assert_eq!(est.orbits, 20);
    assert!(est.stderr >= 0.0);
}

#[test]
fn reversed_fuchsian_exponent_is_minus_one() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    let mut vals = Vec::new();
    for i in 0..10 {
        let s = start(&g, 30 + i).time_reversed();
        let e = evolve(&g, &rep, &s, 0.05, 4000).unwrap();
        vals.push(e.log_deriv / 200.0);
    }
    let m = crate::stats::mean(&vals);
    assert!((m + 1.0).abs() < 0.05, "{m}");
}

#[test]
fn halving_dt_barely_moves_the_exponent() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    let a = transverse_lyapunov(&g, &rep, 3, 200.0, 0.05, 10).unwrap();
    let b = transverse_lyapunov(&g, &rep, 3, 200.0, 0.025, 10).unwrap();
    assert!((a.mean - b.mean).abs() < 0.01);
}

#[test]
fn preconditions_are_named() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    let e = transverse_lyapunov(&g, &rep, 1, 50.0, 0.05, 2).unwrap_err();
    assert!(e.to_string().contains("`T`"));
    let e = transverse_lyapunov(&g, &rep, 1, 200.0, 1.5, 2).unwrap_err();
    assert!(e.to_string().contains("`dt`"));
    assert!(transverse_lyapunov(&g, &rep, 1, 200.0, 0.05, 0).is_err());
    assert!(evolve(&g, &rep, &start(&g, 0), 0.0, 1).is_err());
}

#[test]
fn ensembles_are_deterministic() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    let a = transverse_lyapunov(&g, &rep, 9, 100.0, 0.1, 3).unwrap();
    let b = transverse_lyapunov(&g, &rep, 9, 100.0, 0.1, 3).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| transverse_lyapunov(&g, &rep, 9, 100.0, 0.1, 3).unwrap());
    assert_eq!(a, c);
}

#[test]
fn representation_json_roundtrip() {
    let g = g2();
    let q = Representation::quasi_fuchsian_like(&g, 0.3).unwrap();
    let j = q.to_json();
    let s = serde_json::to_string(&j).unwrap();
    assert!(s.contains("\"tag\":\"quasi-fuchsian-like\""));
    let back: RepresentationJson = serde_json::from_str(&s).unwrap();
    let r = back.build().unwrap();
    for (a, b) in q.images().iter().zip(r.images()) {
        assert!(a.max_abs_diff(b) < 1e-14);
    }
}

#[test]
fn trajectory_csv_layout() {
    let g = g2();
    let rep = Representation::fuchsian(&g);
    let rows = trajectory(&g, &rep, &start(&g, 0), 0.1, 5).unwrap();
    assert_eq!(rows.len(), 6);
    let csv = trajectory_csv(&rows, None);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,re_base,im_base,angle,fiber_affine_re,fiber_affine_im,log_deriv");
    assert_eq!(csv.lines().count(), 7);
    assert!(trajectory_csv(&rows, Some("geodesic")).starts_with("path_type,t,"));
}

#[test]
fn random_fibers_are_round() {
    // mean of the Cartesian image of uniform points is zero, second moment 1/3
    let mut rng = stream(1, Purpose::Aux, 0);
    let n = 40_000;
    let mut m = [0.0; 3];
    let mut zz = 0.0;
    for _ in 0..n {
        let p = random_fiber(&mut rng).to_cartesian();
        for k in 0..3 {
            m[k] += p[k] / n as f64;
        }
        zz += p[2] * p[2] / n as f64;
    }
    for v in m {
        assert!(v.abs() < 0.02);
    }
    assert!((zz - 1.0 / 3.0).abs() < 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reversal_is_an_involution(x in -0.5..0.5f64, y in 0.6..1.6f64, th in 0.0..std::f64::consts::TAU) {
        let f = Frame::from_point_angle(Complex::new(x, y), th).unwrap();
        let s = SkewState { frame: f, fiber: SpherePoint::infinity(), log_deriv: 0.0, time: 0.0, steps: 0 };
        let r = s.time_reversed().time_reversed();
        prop_assert!((r.base_point() - s.base_point()).norm() < 1e-14);
        prop_assert!(crate::hyperbolic::wrap_signed(r.frame.direction() - th).abs() < 1e-12);
    }

    #[test]
    fn log_derivative_is_additive(k1 in 1u64..3000, k2 in 1u64..3000, i in 0u64..50) {
        let g = g2();
        let rep = Representation::fuchsian(&g);
        let s = start(&g, i);
        let a = evolve(&g, &rep, &s, 0.05, k1).unwrap();
        let b = evolve(&g, &rep, &a, 0.05, k2).unwrap();
        let c = evolve(&g, &rep, &s, 0.05, k1 + k2).unwrap();
        prop_assert_eq!(b.log_deriv, c.log_deriv);
        let seg = evolve(&g, &rep, &SkewState { log_deriv: 0.0, ..a }, 0.05, k2).unwrap();
        prop_assert!((a.log_deriv + seg.log_deriv - c.log_deriv).abs() < 1e-9);
    }
}
