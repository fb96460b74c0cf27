use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::Mat2;
use crate::scalar::Real;

/// Point of the Riemann sphere, stored as a unit vector of C^2 (homogeneous coordinates).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint<T> {
    pub v1: Complex<T>,
    pub v2: Complex<T>,
}

impl<T: Real> SpherePoint<T> {
    /// Normalizes a nonzero vector.
    pub fn new(v1: Complex<T>, v2: Complex<T>) -> Result<Self> {
        let n = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Degenerate("zero or non-finite homogeneous vector".into()));
        }
        Ok(Self { v1: v1 / n, v2: v2 / n })
    }

    #[inline]
    pub(crate) fn new_unchecked(v1: Complex<T>, v2: Complex<T>) -> Self {
        let n = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
        Self { v1: v1 / n, v2: v2 / n }
    }

    pub fn from_affine(z: Complex<T>) -> Self {
        Self::new_unchecked(z, Complex::new(T::one(), T::zero()))
    }

    pub fn infinity() -> Self {
        Self { v1: Complex::new(T::one(), T::zero()), v2: Complex::new(T::zero(), T::zero()) }
    }

    /// Affine coordinate `v1 / v2`, `None` at infinity.
    pub fn affine(&self) -> Option<Complex<T>> {
        if self.v2.norm_sqr() == T::zero() {
            None
        } else {
            Some(self.v1 / self.v2)
        }
    }

    /// Unit vector of R^3 via the Hopf map; infinity goes to the north pole.
    pub fn to_cartesian(&self) -> [T; 3] {
        let two = T::one() + T::one();
        let w = self.v1 * self.v2.conj();
        [two * w.re, two * w.im, self.v1.norm_sqr() - self.v2.norm_sqr()]
    }

    /// Inverse of [`to_cartesian`](Self::to_cartesian). The input is normalized first.
    pub fn from_cartesian(p: [T; 3]) -> Result<Self> {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Degenerate("zero vector".into()));
        }
        let (x, y, z) = (p[0] / n, p[1] / n, p[2] / n);
        let two = T::one() + T::one();
        if z > -T::lit(0.5) {
            let a = ((T::one() + z) / two).sqrt();
            let b = Complex::new(x, -y) / (two * a);
            Self::new(Complex::new(a, T::zero()), b)
        } else {
            let b = ((T::one() - z) / two).sqrt();
            let a = Complex::new(x, y) / (two * b);
            Self::new(a, Complex::new(b, T::zero()))
        }
    }

    /// Euclidean distance of the images on the unit sphere.
    pub fn chordal_distance(&self, o: &Self) -> T {
        let two = T::one() + T::one();
        two * (self.v1 * o.v2 - self.v2 * o.v1).norm()
    }
}

/// Complex 2x2 matrix acting on the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatC<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Real> MatC<T> {
    pub const fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        let o = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        Self::new(o, z, z, o)
    }

    pub fn from_real(m: &Mat2<T>) -> Self {
        let c = |x: T| Complex::new(x, T::zero());
        Self::new(c(m.a), c(m.b), c(m.c), c(m.d))
    }

    /// Element `[[alpha, -conj(beta)], [beta, conj(alpha)]]` of SU(2); inputs are normalized.
    pub fn su2(alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n > T::zero()) {
            return Err(Error::Degenerate("zero SU(2) parameters".into()));
        }
        let (a, b) = (alpha / n, beta / n);
        Ok(Self::new(a, -b.conj(), b, a.conj()))
    }

    /// Rotation of angle `angle` about the unit axis `axis` of R^3, as an element of SU(2).
    pub fn su2_axis_angle(axis: [T; 3], angle: T) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(n > T::zero()) {
            return Err(Error::Degenerate("zero rotation axis".into()));
        }
        let (s, c) = (angle * T::lit(0.5)).sin_cos();
        let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
        // exp(-i angle/2 n.sigma), sign chosen so the Hopf image rotates positively.
        let a = Complex::new(c, s * z);
        let b = Complex::new(-s * y, s * x);
        Self::su2(a, b)
    }

    #[inline]
    pub fn det(&self) -> Complex<T> {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn trace(&self) -> Complex<T> {
        self.a + self.d
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if !(det.norm() > T::zero()) || !finite(det) {
            return Err(Error::Degenerate("singular complex matrix".into()));
        }
        Ok(Self::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    /// Rescales to determinant one (principal square root).
    pub fn normalized(&self) -> Result<Self> {
        let det = self.det();
        if !(det.norm() > T::zero()) || !finite(det) {
            return Err(Error::Degenerate("singular complex matrix".into()));
        }
        let r = det.sqrt();
        Ok(Self::new(self.a / r, self.b / r, self.c / r, self.d / r))
    }

    #[inline]
    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    #[inline]
    fn raw_apply(&self, p: &SpherePoint<T>) -> (Complex<T>, Complex<T>) {
        (self.a * p.v1 + self.b * p.v2, self.c * p.v1 + self.d * p.v2)
    }

    #[inline]
    pub fn apply(&self, p: &SpherePoint<T>) -> SpherePoint<T> {
        let (w1, w2) = self.raw_apply(p);
        SpherePoint::new_unchecked(w1, w2)
    }

    /// Applies the map and returns the image together with the spherical
    /// (round metric) derivative at `p`.
    #[inline]
    pub fn apply_with_derivative(&self, p: &SpherePoint<T>) -> (SpherePoint<T>, T) {
        let (w1, w2) = self.raw_apply(p);
        let nn = w1.norm_sqr() + w2.norm_sqr();
        let n = nn.sqrt();
        let pn = p.v1.norm_sqr() + p.v2.norm_sqr();
        let deriv = self.det().norm() * pn / nn;
        (SpherePoint { v1: w1 / n, v2: w2 / n }, deriv)
    }

    /// Derivative of the map at `p` for the round metric of the sphere.
    pub fn spherical_derivative(&self, p: &SpherePoint<T>) -> T {
        self.apply_with_derivative(p).1
    }

    /// `max |(M M^*)_{jk} - delta_{jk}|`.
    pub fn unitarity_defect(&self) -> T {
        let aa = self.a.norm_sqr() + self.b.norm_sqr();
        let dd = self.c.norm_sqr() + self.d.norm_sqr();
        let ad = self.a * self.c.conj() + self.b * self.d.conj();
        (aa - T::one()).abs().max((dd - T::one()).abs()).max(ad.norm())
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        (self.a - o.a)
            .norm()
            .max((self.b - o.b).norm())
            .max((self.c - o.c).norm())
            .max((self.d - o.d).norm())
    }

    pub fn distance_to_pm_identity(&self) -> T {
        let id = Self::identity();
        let neg = Self::new(-id.a, id.b, id.c, -id.d);
        self.max_abs_diff(&id).min(self.max_abs_diff(&neg))
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| finite(*z))
    }
}

#[inline]
fn finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
