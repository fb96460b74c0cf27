use proptest::prelude::*;

use super::*;
use crate::rng::{stream, Purpose};
use crate::surface::{genus2, punctured_torus, FuchsianGroup};
use crate::{Complex, Frame};

fn g2() -> FuchsianGroup<f64> {
    genus2().unwrap()
}

fn flat() -> ConformalMetric {
    build_invariant_bump(&g2(), 0.0, 2).unwrap()
}

fn bumpy() -> ConformalMetric {
    build_invariant_bump(&g2(), 0.05, 3).unwrap()
}

fn start(m: &ConformalMetric, i: u64, u: f64) -> GeodesicVCState {
    let (z, theta) = random_direction_state(m, &mut stream(17, Purpose::VariableCurvature, i));
    GeodesicVCState::new(z, theta, u).unwrap()
}

#[test]
fn unperturbed_metric_has_curvature_minus_one() {
    let m = flat();
    let p = m.pinch();
    assert_eq!((p.kappa0, p.kappa1), (1.0, 1.0));
    assert_eq!(m.invariance_residual(), 0.0);
    for z in m.probe_points(20, 1) {
        assert_eq!(m.local(z).unwrap().curvature, -1.0);
    }
}

#[test]
fn perturbed_pinch_is_reported() {
    let m = bumpy();
    let p = m.pinch();
    assert!(p.k_min >= -1.3 && p.k_max <= -0.7, "{p:?}");
    assert!(p.k_min < -1.0 && p.k_max > -1.0, "curvature is not constant: {p:?}");
    assert!(p.kappa0 > 0.0 && p.kappa0 <= -p.k_max && p.kappa1 >= -p.k_min);
}

#[test]
fn curvature_matches_finite_differences() {
    // K = e^{-2 phi} (-1 - y^2 (phi_xx + phi_yy)) from the sampled phi alone.
    let m = bumpy();
    let h = 1e-4;
    for z in m.probe_points(30, 2) {
        let f = |w: Complex| m.local(w).unwrap().phi;
        let c = f(z);
        let lap = (f(z + h) + f(z - h) + f(z + Complex::new(0.0, h)) + f(z - Complex::new(0.0, h)) - 4.0 * c) / (h * h);
        let k = (-2.0 * c).exp() * (-1.0 - z.im * z.im * lap);
        let g = m.local(z).unwrap();
        assert!((k - g.curvature).abs() < 1e-5, "{z}: {k} vs {}", g.curvature);
        let gx = (f(z + h) - f(z - h)) / (2.0 * h);
        let gy = (f(z + Complex::new(0.0, h)) - f(z - Complex::new(0.0, h))) / (2.0 * h);
        assert!((gx - g.phi_x).abs() < 1e-7 && (gy - g.phi_y).abs() < 1e-7);
    }
}

#[test]
fn invariance_is_exact_up_to_truncation() {
    let g = g2();
    let m4 = build_invariant_bump(&g, 0.05, 4).unwrap();
    let m6 = build_invariant_bump(&g, 0.05, 6).unwrap();
    assert!(m4.invariance_residual() < 1e-6 * 0.05, "{}", m4.invariance_residual());
    for z in m4.probe_points(100, 3) {
        assert!((m4.phi_direct(z) - m6.phi_direct(z)).abs() < 1e-6 * 0.05);
    }
}

#[test]
fn construction_preconditions() {
    let g = g2();
    assert!(build_invariant_bump(&g, 0.2, 3).is_err());
    assert!(build_invariant_bump(&g, -0.01, 3).is_err());
    assert!(build_invariant_bump(&g, 0.05, 1).is_err());
    assert!(build_invariant_bump(&punctured_torus().unwrap(), 0.05, 3).is_err());
    let spec = MetricSpec::new(0.05, 3);
    let back: MetricSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back, spec);
    let mut bad = spec.clone();
    bad.bump.profile = "gaussian".into();
    assert!(bad.build(&g).is_err());
}

#[test]
fn riccati_fixed_points() {
    let m = flat();
    let mut s = start(&m, 0, 1.0);
    for _ in 0..2000 {
        s = geodesic_riccati_step(&m, &s, STEP).unwrap();
        assert_eq!(s.u, 1.0);
    }
    let m4 = flat().with_curvature_override(-4.0).unwrap();
    let mut s = start(&m4, 0, 2.0);
    for _ in 0..2000 {
        s = geodesic_riccati_step(&m4, &s, STEP).unwrap();
        assert_eq!(s.u, 2.0);
    }
    // And it attracts.
    let mut s = start(&m4, 0, 0.5);
    for _ in 0..10_000 {
        s = geodesic_riccati_step(&m4, &s, STEP).unwrap();
    }
    assert!((s.u - 2.0).abs() < 1e-12);
}

#[test]
fn unperturbed_geodesic_matches_closed_form() {
    let m = flat();
    let s0 = start(&m, 1, 1.0);
    let frame = Frame::from_point_angle(s0.z, s0.theta).unwrap();
    let mut s = s0;
    for k in 1..=10_000u32 {
        s = geodesic_riccati_step(&m, &s, STEP).unwrap();
        if k % 1000 == 0 {
            let f = frame.geodesic_advance(k as f64 * STEP);
            let zf = f.base_point();
            let rel = (s.z - zf).norm() / zf.im;
            let dtheta = crate::hyperbolic::wrap_signed(s.theta - f.direction()).abs();
            assert!(rel < 1e-6 && dtheta < 1e-6, "t = {}: {rel} {dtheta}", k as f64 * STEP);
        }
    }
}

#[test]
fn step_preconditions() {
    let m = flat();
    let s = start(&m, 0, 1.0);
    assert!(geodesic_riccati_step(&m, &s, 2e-3).is_err());
    assert!(geodesic_riccati_step(&m, &s, 0.0).is_err());
    assert!(unstable_log_jacobian(&m, &s, 10.0, 5.0, 1.0).is_err());
}

#[test]
fn riccati_stays_in_invariant_interval() {
    let m = bumpy();
    let (a, b) = m.pinch().riccati_interval();
    for (i, u0) in [(0, a), (1, b), (2, 0.5 * (a + b))] {
        let mut s = start(&m, i, u0);
        for _ in 0..20_000 {
            s = geodesic_riccati_step(&m, &s, STEP).unwrap();
            assert!(s.u >= a - 1e-12 && s.u <= b + 1e-12, "u = {} outside [{a}, {b}]", s.u);
            if !m.group().domain().contains(s.z) {
                let f = m.group().domain().reduce(&Frame::from_point_angle(s.z, s.theta).unwrap()).unwrap().0;
                s.z = f.base_point();
                s.theta = f.direction();
            }
        }
    }
}

#[test]
fn unperturbed_jacobian_is_time() {
    let m = flat();
    let s = start(&m, 3, 1.0);
    let t = 30.0;
    let j = unstable_log_jacobian(&m, &s, t, min_washout(&m), 1.0).unwrap();
    assert!((j.value - t).abs() < 1e-6 * t, "{}", j.value);
}

#[test]
fn washout_forgets_initialization() {
    let m = bumpy();
    let (a, b) = m.pinch().riccati_interval();
    let s = start(&m, 4, 0.0);
    let w = min_washout(&m);
    let j1 = unstable_log_jacobian(&m, &s, 5.0, w, a).unwrap();
    let j2 = unstable_log_jacobian(&m, &s, 5.0, w, b).unwrap();
    assert!((j1.u_start - j2.u_start).abs() < 1e-8);
    assert!((j1.value - j2.value).abs() < 1e-8);
}

#[test]
fn jacobian_is_additive() {
    let m = bumpy();
    let s = start(&m, 5, 0.0);
    let w = min_washout(&m);
    let whole = unstable_log_jacobian(&m, &s, 20.0, w, 1.0).unwrap();
    let half = unstable_log_jacobian(&m, &s, 10.0, w, 1.0).unwrap();
    let joined = extend_log_jacobian(&m, &half, 10.0).unwrap();
    assert!((whole.value - joined.value).abs() < 1e-9);
    assert_eq!(whole.end, joined.end);
}

#[test]
fn pair_of_a_state_with_itself_is_one() {
    let m = bumpy();
    let pair = unstable_pair(&m, &start(&m, 6, 1.0), 0.1, DEFAULT_BACK_TIME).unwrap();
    let same = UnstablePair { y: pair.x, offset: 0.0, ..pair };
    assert_eq!(psi_u(&m, &same, 50.0).unwrap().psi, 1.0);
}

#[test]
fn unperturbed_psi_is_one() {
    let m = flat();
    let pair = unstable_pair(&m, &start(&m, 7, 1.0), 0.1, DEFAULT_BACK_TIME).unwrap();
    assert!((pair.distance - 0.1).abs() < 1e-3);
    let r = psi_u(&m, &pair, 50.0).unwrap();
    assert!((r.psi - 1.0).abs() < 1e-6, "{r:?}");
}

#[test]
fn pairs_lie_on_unstable_leaves() {
    // Flowing a pair backward brings the states together at the rate of the
    // unstable contraction.
    let m = bumpy();
    let pair = unstable_pair(&m, &start(&m, 8, 1.0), 0.1, DEFAULT_BACK_TIME).unwrap();
    let mut ys = [pair.y.reversed()];
    let back = super::flow::integrate_together(&m, &pair.x.reversed(), &mut ys, STEP, 10_000).unwrap();
    let d = crate::hyperbolic::hyperbolic_distance(back.z, ys[0].z).unwrap();
    assert!(d < 0.1 * (-5.0f64).exp(), "{d}");
}

#[test]
fn perturbed_psi_converges() {
    let m = bumpy();
    let pair = unstable_pair(&m, &start(&m, 9, 1.0), 0.1, DEFAULT_BACK_TIME).unwrap();
    let r = psi_u(&m, &pair, 100.0).unwrap();
    assert!(r.defect < 1e-4, "{r:?}");
    assert!(r.log_psi != 0.0);
}

#[test]
fn psi_is_multiplicative_on_triples() {
    let m = bumpy();
    let fam = unstable_family(&m, &start(&m, 10, 1.0), &[0.05, 0.1], DEFAULT_BACK_TIME).unwrap();
    let (a, b) = (&fam[0], &fam[1]);
    // Horocycle offsets compose additively, so y_b is reached from y_a's past.
    let ab = UnstablePair {
        x: a.y,
        y: b.y,
        past: super::unstable::displaced(&a.past, a.offset).unwrap(),
        offset: b.offset - a.offset,
        ..*b
    };
    let xa = psi_u(&m, a, 50.0).unwrap();
    let xb = psi_u(&m, b, 50.0).unwrap();
    let yab = psi_u(&m, &ab, 50.0).unwrap();
    let tol = xa.defect.max(xb.defect).max(yab.defect) + 1e-8;
    assert!((xa.log_psi + yab.log_psi - xb.log_psi).abs() <= tol, "{xa:?} {yab:?} {xb:?}");
}

#[test]
fn distortion_vanishes_without_perturbation() {
    let m = flat();
    let fam = unstable_family(&m, &start(&m, 11, 1.0), &[0.1, 0.2, 0.4], DEFAULT_BACK_TIME).unwrap();
    let r = distortion_constant(&m, &fam, 50.0).unwrap();
    assert!(r.log_differences.iter().all(|&v| v == 0.0), "{r:?}");
    assert_eq!(r.constant, 0.0);
}

#[test]
fn distortion_is_stable_and_linear() {
    let m = bumpy();
    let fam = unstable_family(&m, &start(&m, 12, 1.0), &[0.05, 0.1], DEFAULT_BACK_TIME).unwrap();
    let c100 = distortion_constant(&m, &fam, 100.0).unwrap();
    let c200 = distortion_constant(&m, &fam, 200.0).unwrap();
    assert!(c100.constant > 0.0);
    assert!((c100.constant - c200.constant).abs() <= 0.1 * c100.constant);
    let ratio = c100.log_differences[0] / c100.log_differences[1];
    assert!((ratio - 0.5).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn pair_preconditions() {
    let m = bumpy();
    let s = start(&m, 0, 1.0);
    assert!(unstable_pair(&m, &s, 0.6, DEFAULT_BACK_TIME).is_err());
    assert!(unstable_pair(&m, &s, 0.0, DEFAULT_BACK_TIME).is_err());
    let p = unstable_pair(&m, &s, 0.1, DEFAULT_BACK_TIME).unwrap();
    assert!(psi_u(&m, &p, 10.0).is_err());
    assert!(distortion_constant(&m, &[], 100.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn phi_is_invariant_under_generators(seed in 0u64..1000, letter in 0usize..8) {
        let m = build_invariant_bump(&g2(), 0.05, 4).unwrap();
        let z = m.probe_points(1, seed)[0];
        let gens = m.group().generators();
        let l = crate::surface::Letter::new((letter / 2) as u16, letter % 2 == 1);
        let w = l.matrix(gens).apply(z);
        prop_assert!((m.phi_direct(w) - m.phi_direct(z)).abs() < 1e-12);
    }
}
