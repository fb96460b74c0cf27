use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hyperbolic::{hyperbolic_distance, Frame, Mat2};

type C = Complex<f64>;

fn g2() -> FuchsianGroup<f64> {
    genus2().unwrap()
}

#[test]
fn genus2_verifies() {
    let g = g2();
    let r = g.verify(1e-8);
    assert!(r.pass, "{:?}", r.failures);
    assert_eq!(r.euler_characteristic, -2);
    assert_eq!(r.vertex_cycles, 1);
    assert!((r.area - 4.0 * std::f64::consts::PI).abs() < 1e-6);
    assert_eq!(g.pairing(), vec![2, 3, 0, 1, 6, 7, 4, 5]);
}

#[test]
fn genus2_relator_by_direct_product() {
    let g = g2();
    let gens = g.generators();
    let inv = |m: &Mat2<f64>| Mat2::new(m.d, -m.b, -m.c, m.a);
    let mul = |x: Mat2<f64>, y: Mat2<f64>| {
        Mat2::new(x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d)
    };
    let (a1, b1, a2, b2) = (inv(&gens[0]), gens[1], inv(&gens[2]), gens[3]);
    let c1 = mul(mul(mul(a1, b1), inv(&a1)), inv(&b1));
    let c2 = mul(mul(mul(a2, b2), inv(&a2)), inv(&b2));
    let r = mul(c1, c2);
    let res = (r.a.abs() - 1.0).abs().max(r.b.abs()).max(r.c.abs()).max((r.d.abs() - 1.0).abs());
    assert!(res < 1e-9, "residual {res}");
    assert!(r.a * r.d > 0.0);
}

#[test]
fn genus2_generators_are_hyperbolic() {
    for m in g2().generators() {
        assert!(m.trace().abs() > 2.0);
        // all four are conjugate: trace 2 + sqrt 2
        assert!((m.trace().abs() - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((m.det() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn punctured_torus_commutator_is_parabolic() {
    // exact integer arithmetic oracle
    type M = [[i64; 2]; 2];
    let mul = |x: M, y: M| -> M {
        [
            [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
            [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
        ]
    };
    let inv = |x: M| -> M { [[x[1][1], -x[0][1]], [-x[1][0], x[0][0]]] };
    let a: M = [[1, 1], [1, 2]];
    let b: M = [[1, -1], [-1, 2]];
    let c = mul(mul(mul(a, b), inv(a)), inv(b));
    assert_eq!(c[0][0] + c[1][1], -2);
    assert_ne!(c, [[1, 0], [0, 1]]);

    let g = punctured_torus::<f64>().unwrap();
    assert_eq!(g.generators().len(), 2);
    for m in g.generators() {
        assert_eq!(m.trace().abs(), 3.0);
    }
    let r = g.verify(1e-8);
    assert!(r.pass, "{:?}", r.failures);
    assert_eq!(r.euler_characteristic, -1);
    assert_eq!(r.cusps, 1);
    assert!((r.area - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    assert!(g.relator().evaluate(g.generators()).distance_to_pm_identity() > 1.0);
}

#[test]
fn perturbed_generator_fails_verification() {
    let g = g2();
    let mut gens = g.generators().to_vec();
    gens[1].b += 1e-3;
    let p = g.with_generators_replaced(gens).unwrap();
    let r = p.verify(1e-8);
    assert!(!r.pass);
    assert!(r.relator_residual > 1e-5 && r.relator_residual < 1e-1, "{}", r.relator_residual);
}

#[test]
fn identity_generators_fail() {
    let g = g2();
    let ids = vec![Mat2::identity(); 4];
    let p = g.with_generators_replaced(ids).unwrap();
    let r = p.verify(1e-8);
    assert!(!r.pass);
    assert!(r.failures.iter().any(|f| f.contains("not hyperbolic")));
}

#[test]
fn interior_point_reduces_to_itself() {
    let g = g2();
    let f = Frame::from_point_angle(C::new(0.1, 1.2), 0.3).unwrap();
    let (r, w) = g.reduce(&f).unwrap();
    assert!(w.is_empty());
    assert_eq!(r, f);
}

#[test]
fn generator_translate_reduces_back() {
    let g = g2();
    let f = Frame::from_point_angle(C::new(-0.2, 0.9), 2.0).unwrap();
    for (k, m) in g.generators().iter().enumerate() {
        let moved = f.left_mul(m);
        let (r, w) = g.reduce(&moved).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.letters()[0], Letter::new(k as u16, false));
        assert!(r.matrix().max_abs_diff(f.matrix()) < 1e-12);
    }
}

#[test]
fn reduced_word_reconstructs_frame() {
    let g = g2();
    let f = Frame::from_point_angle(C::new(0.05, 1.1), 0.7).unwrap().geodesic_advance(13.0);
    let (r, w) = g.reduce(&f).unwrap();
    assert!(g.domain().contains(r.base_point()));
    let back = r.left_mul(&w.evaluate(g.generators()));
    assert!(hyperbolic_distance(back.base_point(), f.base_point()).unwrap() < 1e-8);
}

#[test]
fn long_geodesic_word_length_bound() {
    let g = g2();
    let ell_min = g
        .generators()
        .iter()
        .map(|m| 2.0 * (m.trace().abs() / 2.0).acosh())
        .fold(f64::INFINITY, f64::min);
    // Greedy words are not shortest words, so the margin is another copy of
    // the translation bound (observed worst case is about 1.6 times the bound).
    let bound = (50.0 / ell_min).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0;
    for _ in 0..200 {
        let z = g.domain().sample_uniform(&mut rng);
        let th = rand::Rng::random::<f64>(&mut rng) * std::f64::consts::TAU;
        let f = Frame::from_point_angle(z, th).unwrap().geodesic_advance(50.0);
        let (r, w) = g.reduce(&f).unwrap();
        assert!(g.domain().contains(r.base_point()));
        worst = worst.max(w.len());
    }
    assert!(worst <= 2 * bound + 4, "worst {worst}, bound {bound}");
}

#[test]
fn tie_break_is_deterministic() {
    let g = g2();
    let d_mid = (1.0 / (std::f64::consts::PI / 8.0).tan()).acosh();
    // side 0 is kept by the half-open rule, its partner side 2 is not
    for (s, kept) in [(0usize, true), (2, false)] {
        let phi = std::f64::consts::FRAC_PI_2 + s as f64 * std::f64::consts::FRAC_PI_4;
        let z = Frame::from_point_angle(C::new(0.0, 1.0), phi).unwrap().geodesic_advance(d_mid).base_point();
        assert!(g.domain().sides()[s].line.sinh_signed_distance(z).abs() < 1e-12);
        let first = g.domain().reduce_point(z).unwrap();
        assert_eq!(first.1.is_empty(), kept);
        for _ in 0..10 {
            let again = g.domain().reduce_point(z).unwrap();
            assert_eq!(first.0.re.to_bits(), again.0.re.to_bits());
            assert_eq!(first.0.im.to_bits(), again.0.im.to_bits());
            assert_eq!(first.1, again.1);
        }
    }
}

#[test]
fn json_roundtrip_preserves_group() {
    let g = g2();
    let j = GroupJson::from_group(&g);
    let s = j.to_json().unwrap();
    let back = GroupJson::from_json(&s).unwrap();
    assert_eq!(back, j);
    let (h, report) = back.into_group(1e-8).unwrap();
    assert!(report.pass);
    for (a, b) in g.generators().iter().zip(h.generators()) {
        assert_eq!(a, b);
    }
}

#[test]
fn json_without_sides_builds_dirichlet_polygon() {
    let g = g2();
    let mut j = GroupJson::from_group(&g);
    j.sides = None;
    let (h, report) = j.into_group(1e-8).unwrap();
    assert!(report.pass, "{:?}", report.failures);
    assert_eq!(h.pairing(), g.pairing());
    let mut bad = GroupJson::from_group(&g);
    bad.generators[0][0][1] += 1e-3;
    assert!(bad.into_group(1e-8).is_err());
}

#[test]
fn polar_coordinates_span_unit_interval() {
    let g = g2();
    let d = g.domain();
    let (s0, _) = d.polar_coordinates(C::new(0.0, 1.0));
    assert_eq!(s0, 0.0);
    for v in d.vertices() {
        if let Vertex::Finite(z) = v {
            let (s, _) = d.polar_coordinates(z);
            assert!((s - 1.0).abs() < 1e-9, "vertex s = {s}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let z = d.sample_uniform(&mut rng);
        let (s, a) = d.polar_coordinates(z);
        assert!((0.0..=1.0).contains(&s) && (0.0..std::f64::consts::TAU).contains(&a));
    }
}

#[test]
fn uniform_sampler_matches_area() {
    // acceptance fraction of the circumscribed ball estimates area / ball area
    let g = g2();
    let d = g.domain();
    let r = d.circumradius();
    let ball = 2.0 * std::f64::consts::PI * (r.cosh() - 1.0);
    let n = 40_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut inside = 0;
    for _ in 0..n {
        let u: f64 = rand::Rng::random(&mut rng);
        let cm1 = u * (r.cosh() - 1.0);
        let rr = (cm1 / (2.0 + cm1)).sqrt();
        let a: f64 = rand::Rng::random::<f64>(&mut rng) * std::f64::consts::TAU;
        let z = d.from_base_disk(C::new(rr * a.cos(), rr * a.sin()));
        if d.contains(z) {
            inside += 1;
        }
    }
    let p = inside as f64 / n as f64;
    let expect = 4.0 * std::f64::consts::PI / ball;
    let se = (expect * (1.0 - expect) / n as f64).sqrt();
    assert!((p - expect).abs() < 4.0 * se, "p {p} expect {expect}");
}

#[test]
fn reduction_budget_is_enforced() {
    let g = g2();
    let d = g.domain().clone().with_budget(2);
    let f = Frame::from_point_angle(C::new(0.0, 1.0), 0.4).unwrap().geodesic_advance(40.0);
    assert!(matches!(d.reduce(&f), Err(crate::Error::ReductionBudget { budget: 2 })));
}

#[test]
fn punctured_torus_reduces() {
    let g = punctured_torus::<f64>().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let z = g.domain().sample_uniform(&mut rng);
        let f = Frame::from_point_angle(z, 1.0).unwrap().geodesic_advance(8.0);
        let (r, w) = g.reduce(&f).unwrap();
        assert!(g.domain().contains(r.base_point()));
        let back = r.left_mul(&w.evaluate(g.generators()));
        assert!(hyperbolic_distance(back.base_point(), f.base_point()).unwrap() < 1e-6);
    }
}

#[test]
fn word_signed_encoding() {
    let w = Word(vec![Letter::new(0, true), Letter::new(3, false)]);
    assert_eq!(serde_json::to_string(&w).unwrap(), "[-1,4]");
    let back: Word = serde_json::from_str("[-1,4]").unwrap();
    assert_eq!(back, w);
    assert!(serde_json::from_str::<Word>("[0]").is_err());
    assert_eq!(w.concat(&w.inverse()).freely_reduced(), Word::new());
}

#[test]
fn generic_over_f32() {
    let g = genus2::<f32>().unwrap();
    let r = g.verify(1e-4);
    assert!(r.pass, "{:?}", r.failures);
}

fn arb_frame() -> impl Strategy<Value = Frame<f64>> {
    (-0.8..0.8f64, 0.4..2.5f64, 0.0..std::f64::consts::TAU, 0.0..12.0f64)
        .prop_map(|(x, y, t, s)| Frame::from_point_angle(C::new(x, y), t).unwrap().geodesic_advance(s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduce_is_idempotent(f in arb_frame()) {
        let g = g2();
        let (r, _) = g.reduce(&f).unwrap();
        let (r2, w2) = g.reduce(&r).unwrap();
        prop_assert!(w2.is_empty());
        prop_assert_eq!(r, r2);
    }

    #[test]
    fn reduce_is_equivariant(f in arb_frame(), k in 0usize..4, inv in any::<bool>()) {
        let g = g2();
        let m = Letter::new(k as u16, inv).matrix(g.generators());
        let (a, _) = g.reduce(&f).unwrap();
        let (b, _) = g.reduce(&f.left_mul(&m)).unwrap();
        let d = hyperbolic_distance(a.base_point(), b.base_point()).unwrap();
        prop_assert!(d < 1e-8, "distance {}", d);
        prop_assert!(crate::hyperbolic::wrap_signed(a.direction() - b.direction()).abs() < 1e-8);
    }
}
