use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{
    cosh_distance_minus_one, from_disk, to_disk, wrap_angle, BoundaryPoint, Frame, Mat2,
};
use crate::scalar::Real;
use crate::surface::{GeodesicLine, Letter, Word};

/// Default bound on the number of side crossings in one reduction.
pub const DEFAULT_REDUCTION_BUDGET: usize = 1_000_000;

/// Distance (as a hyperbolic sine) within which a point counts as lying on a side.
pub const SIDE_TOLERANCE: f64 = 1e-12;

/// Radius used in place of infinity when a domain has ideal vertices.
pub const IDEAL_RADIUS_CAP: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertex<T> {
    Finite(Complex<T>),
    Ideal(BoundaryPoint<T>),
}

impl<T: Real> Vertex<T> {
    pub fn is_ideal(&self) -> bool {
        matches!(self, Vertex::Ideal(_))
    }

    pub fn apply(&self, m: &Mat2<T>) -> Self {
        match self {
            Vertex::Finite(z) => Vertex::Finite(m.apply(*z)),
            Vertex::Ideal(p) => Vertex::Ideal(m.apply_boundary(*p)),
        }
    }

    /// Hyperbolic distance between finite vertices, chordal distance between
    /// ideal ones, infinity for mixed pairs.
    pub fn mismatch(&self, o: &Self) -> T {
        match (self, o) {
            (Vertex::Finite(a), Vertex::Finite(b)) => crate::hyperbolic::hyperbolic_distance_unchecked(*a, *b),
            (Vertex::Ideal(a), Vertex::Ideal(b)) => a.distance(b),
            _ => T::infinity(),
        }
    }
}

/// Input description of one side: the endpoints of its full geodesic and the
/// letter `T` such that the tile across the side is `T(D)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideSpec<T> {
    pub endpoints: [BoundaryPoint<T>; 2],
    pub letter: Letter,
}

#[derive(Clone, Debug)]
pub struct Side<T> {
    pub line: GeodesicLine<T>,
    pub endpoints: [BoundaryPoint<T>; 2],
    /// Arc from `start` to `end`, counterclockwise around the base point.
    pub start: Vertex<T>,
    pub end: Vertex<T>,
    pub partner: usize,
    pub letter: Letter,
    pub transform: Mat2<T>,
    pub inverse: Mat2<T>,
    belongs: bool,
    disk_center: Complex<T>,
}

impl<T: Real> Side<T> {
    /// Whether points on this side belong to the half-open domain.
    pub fn belongs(&self) -> bool {
        self.belongs
    }
}

/// Geodesic polygon with side pairings, centred at an interior base point.
#[derive(Clone, Debug)]
pub struct FundamentalDomain<T> {
    sides: Vec<Side<T>>,
    base: Complex<T>,
    base_frame: Mat2<T>,
    base_frame_inv: Mat2<T>,
    sample_cm1: T,
    cap_cm1: T,
    ideal: bool,
    budget: usize,
}

impl<T: Real> FundamentalDomain<T> {
    /// Builds the polygon. Sides must be listed counterclockwise around `base`.
    pub fn from_sides(specs: &[SideSpec<T>], base: Complex<T>, generators: &[Mat2<T>]) -> Result<Self> {
        let n = specs.len();
        if n < 3 || !n.is_multiple_of(2) {
            return Err(Error::GroupInvalid(format!("polygon needs an even number >= 4 of sides, got {n}")));
        }
        if !(base.im > T::zero()) {
            return Err(Error::NotInHalfPlane { im: base.im.to_f64_lossy() });
        }
        let mut lines = Vec::with_capacity(n);
        for (k, s) in specs.iter().enumerate() {
            if s.letter.generator as usize >= generators.len() {
                return Err(Error::GroupInvalid(format!("side {k} uses missing generator {}", s.letter.generator)));
            }
            lines.push(GeodesicLine::through(s.endpoints[0], s.endpoints[1])?.oriented_away_from(base)?);
        }
        let mut partners = vec![usize::MAX; n];
        for k in 0..n {
            let want = specs[k].letter.inv();
            let hits: Vec<usize> = (0..n).filter(|&j| specs[j].letter == want).collect();
            if hits.len() != 1 || hits[0] == k {
                return Err(Error::GroupInvalid(format!("side {k} has no unique partner side")));
            }
            partners[k] = hits[0];
        }
        // vertex k sits between side k-1 and side k
        let mut vertices = Vec::with_capacity(n);
        for k in 0..n {
            let prev = (k + n - 1) % n;
            vertices.push(corner(&specs[prev], &lines[prev], &specs[k], &lines[k]).ok_or_else(|| {
                Error::GroupInvalid(format!("sides {prev} and {k} do not meet"))
            })?);
        }
        let base_frame = *Frame::from_point_angle(base, T::FRAC_PI_2())?.matrix();
        let base_frame_inv = base_frame.sl_inverse();
        let mut sides = Vec::with_capacity(n);
        for k in 0..n {
            let transform = specs[k].letter.matrix(generators);
            let w: Vec<Complex<T>> = specs[k]
                .endpoints
                .iter()
                .map(|p| boundary_to_disk(base_frame_inv.apply_boundary(*p)))
                .collect();
            let denom = T::one() + (w[0] * w[1].conj()).re;
            if !(denom.abs() > T::lit(1e-14)) {
                return Err(Error::Degenerate(format!("side {k} passes through the base point")));
            }
            let disk_center = (w[0] + w[1]) / denom;
            sides.push(Side {
                line: lines[k],
                endpoints: specs[k].endpoints,
                start: vertices[k],
                end: vertices[(k + 1) % n],
                partner: partners[k],
                letter: specs[k].letter,
                transform,
                inverse: transform.sl_inverse(),
                belongs: k < partners[k],
                disk_center,
            });
        }
        let ideal = vertices.iter().any(|v| v.is_ideal());
        let cap = T::lit(IDEAL_RADIUS_CAP);
        let cap_cm1 = cap.cosh() - T::one();
        let sample_cm1 = if ideal {
            cap_cm1
        } else {
            let far = vertices
                .iter()
                .filter_map(|v| match v {
                    Vertex::Finite(z) => Some(cosh_distance_minus_one(*z, base)),
                    Vertex::Ideal(_) => None,
                })
                .fold(T::zero(), T::max);
            far * (T::one() + T::lit(1e-9))
        };
        Ok(Self { sides, base, base_frame, base_frame_inv, sample_cm1, cap_cm1, ideal, budget: DEFAULT_REDUCTION_BUDGET })
    }

    pub fn sides(&self) -> &[Side<T>] {
        &self.sides
    }

    pub fn base_point(&self) -> Complex<T> {
        self.base
    }

    pub fn has_ideal_vertices(&self) -> bool {
        self.ideal
    }

    pub fn vertices(&self) -> Vec<Vertex<T>> {
        self.sides.iter().map(|s| s.start).collect()
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Radius of the smallest ball about the base point that contains the
    /// polygon (capped for ideal polygons).
    pub fn circumradius(&self) -> T {
        (T::one() + self.sample_cm1).acosh()
    }

    #[inline]
    fn violates(&self, k: usize, z: Complex<T>) -> bool {
        let s = &self.sides[k];
        let sd = s.line.sinh_signed_distance(z);
        let tol = T::lit(SIDE_TOLERANCE);
        if s.belongs {
            sd > tol
        } else {
            sd >= -tol
        }
    }

    /// Membership in the half-open domain.
    #[inline]
    pub fn contains(&self, z: Complex<T>) -> bool {
        (0..self.sides.len()).all(|k| !self.violates(k, z))
    }

    /// One greedy move: the violated side whose crossing brings `z` closest to
    /// the base point (lowest index on ties). `None` when `z` is reduced.
    #[inline]
    pub fn next_move(&self, z: Complex<T>) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for k in 0..self.sides.len() {
            if !self.violates(k, z) {
                continue;
            }
            let q = cosh_distance_minus_one(self.sides[k].inverse.apply(z), self.base);
            match best {
                Some((_, bq)) if !(q < bq) => {}
                _ => best = Some((k, q)),
            }
        }
        best.map(|(k, _)| k)
    }

    /// Reduces a point, calling `visit` with each crossed side index in order.
    pub fn reduce_point_with(&self, mut z: Complex<T>, mut visit: impl FnMut(usize)) -> Result<Complex<T>> {
        if !(z.im > T::zero()) {
            return Err(Error::NotInHalfPlane { im: z.im.to_f64_lossy() });
        }
        for _ in 0..=self.budget {
            match self.next_move(z) {
                None => return Ok(z),
                Some(k) => {
                    z = self.sides[k].inverse.apply(z);
                    visit(k);
                }
            }
        }
        Err(Error::ReductionBudget { budget: self.budget })
    }

    /// Reduces a frame, calling `visit` with each crossed side index in order.
    pub fn reduce_frame_with(&self, g: &Frame<T>, mut visit: impl FnMut(usize)) -> Result<Frame<T>> {
        let mut g = *g;
        let mut z = g.base_point();
        if !(z.im > T::zero()) || !z.re.is_finite() {
            return Err(Error::NotInHalfPlane { im: z.im.to_f64_lossy() });
        }
        for _ in 0..=self.budget {
            match self.next_move(z) {
                None => return Ok(g),
                Some(k) => {
                    g = g.left_mul(&self.sides[k].inverse);
                    z = g.base_point();
                    visit(k);
                }
            }
        }
        Err(Error::ReductionBudget { budget: self.budget })
    }

    /// Returns the reduced frame and the word `w` with `g = w * reduced`.
    pub fn reduce(&self, g: &Frame<T>) -> Result<(Frame<T>, Word)> {
        let mut word = Word::new();
        let r = self.reduce_frame_with(g, |k| word.push(self.sides[k].letter))?;
        Ok((r, word))
    }

    pub fn reduce_point(&self, z: Complex<T>) -> Result<(Complex<T>, Word)> {
        let mut word = Word::new();
        let r = self.reduce_point_with(z, |k| word.push(self.sides[k].letter))?;
        Ok((r, word))
    }

    /// Point in the unit disk centred at the base point.
    #[inline]
    pub fn to_base_disk(&self, z: Complex<T>) -> Complex<T> {
        to_disk(self.base_frame_inv.apply(z))
    }

    #[inline]
    pub fn from_base_disk(&self, w: Complex<T>) -> Complex<T> {
        self.base_frame.apply(from_disk(w))
    }

    /// Direction of `g` in the disk centred at the base point, in `[0, 2 pi)`.
    pub fn disk_direction(&self, g: &Frame<T>) -> T {
        let h = g.left_mul(&self.base_frame_inv);
        let u = h.base_point();
        let two = T::one() + T::one();
        let shift = T::FRAC_PI_2() - two * (u.im + T::one()).atan2(u.re);
        wrap_angle(h.direction() + shift)
    }

    /// `(s, alpha)`: angle `alpha` about the base point and normalized radial
    /// coordinate `s = (cosh r - 1) / (cosh R(alpha) - 1)` in `[0, 1]`, where
    /// `R(alpha)` is the distance to the polygon boundary in that direction.
    /// Radial cells of equal width in `s` have equal area within each angular sector.
    pub fn polar_coordinates(&self, z: Complex<T>) -> (T, T) {
        let w = self.to_base_disk(z);
        let two = T::one() + T::one();
        let r2 = w.norm_sqr();
        let alpha = wrap_angle(w.im.atan2(w.re));
        let cm1 = two * r2 / (T::one() - r2);
        let dir = Complex::new(alpha.cos(), alpha.sin());
        let mut t_min = T::one();
        for s in &self.sides {
            let p = (s.disk_center.conj() * dir).re;
            if p > T::one() {
                let t = p - (p * p - T::one()).sqrt();
                if t < t_min {
                    t_min = t;
                }
            }
        }
        let edge = if t_min < T::one() {
            let t2 = t_min * t_min;
            (two * t2 / (T::one() - t2)).min(self.cap_cm1)
        } else {
            self.cap_cm1
        };
        let s = (cm1 / edge).max(T::zero()).min(T::one());
        (s, alpha)
    }

    /// Uniform point of the domain for the hyperbolic area (rejection from
    /// the circumscribed ball, truncated for ideal polygons).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex<T> {
        let two = T::one() + T::one();
        loop {
            let u = T::lit(rng.random::<f64>());
            let cm1 = u * self.sample_cm1;
            let r = (cm1 / (two + cm1)).sqrt();
            let a = T::lit(rng.random::<f64>()) * T::TAU();
            let w = Complex::new(r * a.cos(), r * a.sin());
            let z = self.from_base_disk(w);
            if z.im > T::zero() && self.contains(z) {
                return z;
            }
        }
    }
}

fn boundary_to_disk<T: Real>(p: BoundaryPoint<T>) -> Complex<T> {
    // (x - i) / (x + i) in homogeneous form: (p - i q) / (p + i q)
    let num = Complex::new(p.p, -p.q);
    let den = Complex::new(p.p, p.q);
    num / den
}

pub(crate) fn boundary_direction_in_disk<T: Real>(p: BoundaryPoint<T>) -> Complex<T> {
    boundary_to_disk(p)
}

fn corner<T: Real>(
    a: &SideSpec<T>,
    la: &GeodesicLine<T>,
    b: &SideSpec<T>,
    lb: &GeodesicLine<T>,
) -> Option<Vertex<T>> {
    let tol = T::lit(1e-9);
    for pa in &a.endpoints {
        for pb in &b.endpoints {
            if pa.distance(pb) < tol {
                return Some(Vertex::Ideal(*pa));
            }
        }
    }
    la.intersection(lb).map(Vertex::Finite)
}
