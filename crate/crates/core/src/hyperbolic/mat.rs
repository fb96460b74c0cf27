use std::ops::Mul;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::BoundaryPoint;
use crate::scalar::Real;

/// Real 2x2 matrix `[[a, b], [c, d]]`, acting on the upper half-plane by Moebius maps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Mat2<T> {
    #[inline]
    pub const fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    #[inline]
    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    /// `diag(l, 1/l)`.
    #[inline]
    pub fn diag(l: T) -> Self {
        Self::new(l, T::zero(), T::zero(), l.recip())
    }

    /// Rotation `[[cos p, -sin p], [sin p, cos p]]`; fixes `i`.
    #[inline]
    pub fn rotation(p: T) -> Self {
        let (s, c) = p.sin_cos();
        Self::new(c, -s, s, c)
    }

    #[inline]
    pub fn upper_unipotent(s: T) -> Self {
        Self::new(T::one(), s, T::zero(), T::one())
    }

    #[inline]
    pub fn lower_unipotent(s: T) -> Self {
        Self::new(T::one(), T::zero(), s, T::one())
    }

    #[inline]
    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn trace(&self) -> T {
        self.a + self.d
    }

    #[inline]
    pub fn frobenius_sq(&self) -> T {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// Inverse assuming unit determinant (the adjugate).
    #[inline]
    pub fn sl_inverse(&self) -> Self {
        Self::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det == T::zero() || !det.is_finite() {
            return Err(Error::Degenerate("singular matrix".into()));
        }
        let r = det.recip();
        Ok(Self::new(self.d * r, -self.b * r, -self.c * r, self.a * r))
    }

    /// Rescales to unit determinant. Fails unless `det > 0`.
    pub fn normalized(&self) -> Result<Self> {
        let det = self.det();
        if !(det > T::zero()) || !det.is_finite() {
            return Err(Error::Determinant { deviation: (det - T::one()).abs().to_f64_lossy() });
        }
        let r = det.sqrt().recip();
        Ok(Self::new(self.a * r, self.b * r, self.c * r, self.d * r))
    }

    #[inline]
    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        let num = z * self.a + self.b;
        let den = z * self.c + self.d;
        num / den
    }

    #[inline]
    pub fn apply_boundary(&self, p: BoundaryPoint<T>) -> BoundaryPoint<T> {
        BoundaryPoint::new(self.a * p.p + self.b * p.q, self.c * p.p + self.d * p.q)
    }

    /// Argument of the complex derivative at `z`, i.e. the angle by which
    /// tangent directions at `z` are rotated.
    #[inline]
    pub fn derivative_arg(&self, z: Complex<T>) -> T {
        let w = z * self.c + self.d;
        -(w.im.atan2(w.re) * (T::one() + T::one()))
    }

    /// Complex derivative `det / (cz + d)^2`.
    #[inline]
    pub fn derivative(&self, z: Complex<T>) -> Complex<T> {
        let w = z * self.c + self.d;
        Complex::new(self.det(), T::zero()) / (w * w)
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs())
    }

    /// Distance to `±I` in the max norm.
    pub fn distance_to_pm_identity(&self) -> T {
        let id = Self::identity();
        let neg = Self::new(-T::one(), T::zero(), T::zero(), -T::one());
        self.max_abs_diff(&id).min(self.max_abs_diff(&neg))
    }

    pub fn cast<U: Real>(&self) -> Mat2<U> {
        let f = |x: T| U::lit(x.to_f64_lossy());
        Mat2::new(f(self.a), f(self.b), f(self.c), f(self.d))
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl<T: Real> Mul for &Mat2<T> {
    type Output = Mat2<T>;
    #[inline]
    fn mul(self, o: Self) -> Mat2<T> {
        *self * *o
    }
}

/// Commutator `a b a^-1 b^-1` of unit-determinant matrices.
pub fn commutator<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    *a * *b * a.sl_inverse() * b.sl_inverse()
}
