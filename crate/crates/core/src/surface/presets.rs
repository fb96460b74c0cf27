use num_complex::Complex;

use crate::error::Result;
use crate::hyperbolic::{BoundaryPoint, Frame, Mat2};
use crate::scalar::Real;
use crate::surface::{FuchsianGroup, Letter, RelatorKind, SideSpec, Word};

/// Side pairs of the regular octagon, `(s, s')` with generator `k` carrying side `s` onto `s'`.
pub const OCTAGON_PAIRS: [(usize, usize); 4] = [(0, 2), (1, 3), (4, 6), (5, 7)];

/// Genus-two surface from the regular octagon with interior angles `pi/4`,
/// centred at `i`, side `s` facing direction `pi/2 + s pi/4`.
///
/// Sides are glued in the pattern `a b a^-1 b^-1 c d c^-1 d^-1`, so the relator
/// is `[g0^-1, g1] [g2^-1, g3]`.
pub fn genus2<T: Real>() -> Result<FuchsianGroup<T>> {
    let pi = T::PI();
    let eighth = pi / T::lit(8.0);
    let quarter = pi / T::lit(4.0);
    let cot = eighth.tan().recip();
    // cosh of the distance from the centre to a side midpoint
    let d_mid = cot.acosh();
    let i = Complex::new(T::zero(), T::one());
    let half_turn = Mat2::new(T::zero(), -T::one(), T::one(), T::zero());

    let mid_frames: Vec<Mat2<T>> = (0..8)
        .map(|s| {
            let phi = T::FRAC_PI_2() + T::lit(s as f64) * quarter;
            Frame::from_point_angle(i, phi).map(|f| *f.geodesic_advance(d_mid).matrix())
        })
        .collect::<Result<_>>()?;

    let mut generators = Vec::with_capacity(4);
    for &(s, t) in &OCTAGON_PAIRS {
        let beta = T::lit((t - s) as f64) * quarter;
        let rot = Mat2::rotation(-beta * T::lit(0.5));
        let p = mid_frames[t];
        let h = p * half_turn * p.sl_inverse();
        generators.push(h * rot);
    }

    let mut letters = [Letter::new(0, false); 8];
    for (k, &(s, t)) in OCTAGON_PAIRS.iter().enumerate() {
        letters[t] = Letter::new(k as u16, false);
        letters[s] = Letter::new(k as u16, true);
    }
    let unit = [BoundaryPoint::from_real(-T::one()), BoundaryPoint::from_real(T::one())];
    let sides: Vec<SideSpec<T>> = (0..8)
        .map(|s| SideSpec {
            endpoints: [mid_frames[s].apply_boundary(unit[0]), mid_frames[s].apply_boundary(unit[1])],
            letter: letters[s],
        })
        .collect();

    let g = |k: u16| Letter::new(k, false);
    let relator = Word::commutator(g(0).inv(), g(1)).concat(&Word::commutator(g(2).inv(), g(3)));
    FuchsianGroup::from_sides("genus2", generators, &sides, i, relator, RelatorKind::Identity)
}

/// Once-punctured torus: ideal quadrilateral with vertices `inf, -1, 0, 1`,
/// generators `A = [[1,1],[1,2]]` and `B = [[1,-1],[-1,2]]`, relator `[A, B]`
/// of trace `-2`.
pub fn punctured_torus<T: Real>() -> Result<FuchsianGroup<T>> {
    let one = T::one();
    let two = one + one;
    let a = Mat2::new(one, one, one, two);
    let b = Mat2::new(one, -one, -one, two);
    let inf = BoundaryPoint::infinity();
    let m1 = BoundaryPoint::from_real(-one);
    let zero = BoundaryPoint::from_real(T::zero());
    let p1 = BoundaryPoint::from_real(one);
    // A carries side 0 onto side 2, B carries side 3 onto side 1
    let sides = [
        SideSpec { endpoints: [inf, m1], letter: Letter::new(0, true) },
        SideSpec { endpoints: [m1, zero], letter: Letter::new(1, false) },
        SideSpec { endpoints: [zero, p1], letter: Letter::new(0, false) },
        SideSpec { endpoints: [p1, inf], letter: Letter::new(1, true) },
    ];
    let relator = Word::commutator(Letter::new(0, false), Letter::new(1, false));
    FuchsianGroup::from_sides(
        "punctured-torus",
        vec![a, b],
        &sides,
        Complex::new(T::zero(), one),
        relator,
        RelatorKind::Parabolic,
    )
}
