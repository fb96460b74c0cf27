use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{BoundaryPoint, Mat2};
use crate::scalar::Real;

/// Tolerance on `|det - 1|` accepted when a frame is built from a raw matrix.
pub const DET_TOLERANCE: f64 = 1e-9;

/// Unit tangent vector of the hyperbolic plane, stored as an element of SL(2,R).
///
/// The identity frame sits at `i` pointing straight up. The base point of `g`
/// is `g(i)` and the geodesic flow is right multiplication by
/// `diag(e^{t/2}, e^{-t/2})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frame<T> {
    m: Mat2<T>,
}

/// Which horocycle flow to follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horocycle {
    /// Preserves the forward endpoint.
    Stable,
    /// Preserves the backward endpoint.
    Unstable,
}

impl<T: Real> Frame<T> {
    #[inline]
    pub fn identity() -> Self {
        Self { m: Mat2::identity() }
    }

    /// Wraps a matrix, rescaling it to unit determinant. Rejects matrices whose
    /// determinant is further than [`DET_TOLERANCE`] from one.
    pub fn from_matrix(m: Mat2<T>) -> Result<Self> {
        let dev = (m.det() - T::one()).abs().to_f64_lossy();
        if !(dev <= DET_TOLERANCE) {
            return Err(Error::Determinant { deviation: dev });
        }
        Ok(Self { m: m.normalized()? })
    }

    /// Frame at `z` whose direction makes angle `theta` with the positive real axis.
    pub fn from_point_angle(z: Complex<T>, theta: T) -> Result<Self> {
        if !(z.im > T::zero()) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NotInHalfPlane { im: z.im.to_f64_lossy() });
        }
        let sy = z.im.sqrt();
        let p = Mat2::new(sy, z.re / sy, T::zero(), sy.recip());
        let half = T::lit(0.5);
        let psi = (T::FRAC_PI_2() - theta) * half;
        Ok(Self { m: p * Mat2::rotation(psi) })
    }

    #[inline]
    pub fn matrix(&self) -> &Mat2<T> {
        &self.m
    }

    #[inline]
    pub fn base_point(&self) -> Complex<T> {
        self.m.apply(Complex::new(T::zero(), T::one()))
    }

    /// Direction angle in `[0, 2 pi)`.
    #[inline]
    pub fn direction(&self) -> T {
        let w = Complex::new(self.m.d, self.m.c);
        let two = T::one() + T::one();
        wrap_angle(T::FRAC_PI_2() - two * w.im.atan2(w.re))
    }

    #[inline]
    pub fn geodesic_advance(&self, t: T) -> Self {
        let l = (t * T::lit(0.5)).exp();
        self.scale_by(l)
    }

    /// Right multiplication by `diag(l, 1/l)`; `l = e^{t/2}`.
    #[inline]
    pub(crate) fn scale_by(&self, l: T) -> Self {
        let r = l.recip();
        Self { m: Mat2::new(self.m.a * l, self.m.b * r, self.m.c * l, self.m.d * r) }
    }

    pub fn horocycle_advance(&self, s: T, branch: Horocycle) -> Self {
        let n = match branch {
            Horocycle::Stable => Mat2::upper_unipotent(s),
            Horocycle::Unstable => Mat2::lower_unipotent(s),
        };
        Self { m: self.m * n }
    }

    /// Limit of the base point along the forward geodesic.
    #[inline]
    pub fn forward_endpoint(&self) -> BoundaryPoint<T> {
        BoundaryPoint::new(self.m.a, self.m.c)
    }

    /// Limit of the base point along the backward geodesic.
    #[inline]
    pub fn backward_endpoint(&self) -> BoundaryPoint<T> {
        BoundaryPoint::new(self.m.b, self.m.d)
    }

    /// Same base point, opposite direction.
    #[inline]
    pub fn time_reversed(&self) -> Self {
        let m = &self.m;
        Self { m: Mat2::new(m.b, -m.a, m.d, -m.c) }
    }

    /// Image under the isometry `g`.
    #[inline]
    pub fn left_mul(&self, g: &Mat2<T>) -> Self {
        Self { m: *g * self.m }
    }

    /// Removes determinant drift accumulated by repeated products.
    pub fn renormalized(&self) -> Self {
        match self.m.normalized() {
            Ok(m) => Self { m },
            Err(_) => *self,
        }
    }

    pub fn det_deviation(&self) -> T {
        (self.m.det() - T::one()).abs()
    }

    /// Unit-speed distance between base points.
    pub fn base_distance(&self, other: &Self) -> T {
        let rel = self.m.sl_inverse() * other.m;
        let two = T::one() + T::one();
        (rel.frobenius_sq() / two).max(T::one()).acosh()
    }
}

/// Hyperbolic distance between two points of the upper half-plane.
pub fn hyperbolic_distance<T: Real>(z1: Complex<T>, z2: Complex<T>) -> Result<T> {
    for z in [z1, z2] {
        if !(z.im > T::zero()) {
            return Err(Error::NotInHalfPlane { im: z.im.to_f64_lossy() });
        }
    }
    Ok(hyperbolic_distance_unchecked(z1, z2))
}

#[inline]
pub(crate) fn hyperbolic_distance_unchecked<T: Real>(z1: Complex<T>, z2: Complex<T>) -> T {
    let two = T::one() + T::one();
    two * ((z1 - z2).norm() / (two * (z1.im * z2.im).sqrt())).asinh()
}

/// `cosh d - 1` without the transcendental call; monotone in `d`.
#[inline]
pub(crate) fn cosh_distance_minus_one<T: Real>(z1: Complex<T>, z2: Complex<T>) -> T {
    let two = T::one() + T::one();
    (z1 - z2).norm_sqr() / (two * z1.im * z2.im)
}

/// Maps an angle to `[0, 2 pi)`.
#[inline]
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let tau = T::TAU();
    let r = theta % tau;
    let r = if r < T::zero() { r + tau } else { r };
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

/// Maps an angle difference to `(-pi, pi]`.
#[inline]
pub fn wrap_signed<T: Real>(theta: T) -> T {
    let w = wrap_angle(theta);
    if w > T::PI() {
        w - T::TAU()
    } else {
        w
    }
}

/// Cayley map from the upper half-plane to the unit disk, sending `i` to `0`.
#[inline]
pub fn to_disk<T: Real>(z: Complex<T>) -> Complex<T> {
    let i = Complex::new(T::zero(), T::one());
    (z - i) / (z + i)
}

#[inline]
pub fn from_disk<T: Real>(w: Complex<T>) -> Complex<T> {
    let i = Complex::new(T::zero(), T::one());
    i * (Complex::new(T::one(), T::zero()) + w) / (Complex::new(T::one(), T::zero()) - w)
}
