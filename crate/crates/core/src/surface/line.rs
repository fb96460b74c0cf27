use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hyperbolic::BoundaryPoint;
use crate::scalar::Real;

/// Complete geodesic `{ a |z|^2 + b Re z + c = 0 }`, scaled so that
/// `b^2 - 4ac = 1`. Then `f(z) / Im z` is the hyperbolic sine of the signed
/// distance to the line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicLine<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> GeodesicLine<T> {
    pub fn through(p: BoundaryPoint<T>, q: BoundaryPoint<T>) -> Result<Self> {
        let a = p.q * q.q;
        let b = -(p.p * q.q + q.p * p.q);
        let c = p.p * q.p;
        let disc = (p.p * q.q - q.p * p.q).abs();
        if !(disc > T::zero()) {
            return Err(Error::Degenerate("geodesic endpoints coincide".into()));
        }
        // normalize the endpoint pairs so the scale is meaningful
        let n = ((p.p * p.p + p.q * p.q) * (q.p * q.p + q.q * q.q)).sqrt();
        if disc <= T::lit(1e-14) * n {
            return Err(Error::Degenerate("geodesic endpoints coincide".into()));
        }
        Ok(Self { a: a / disc, b: b / disc, c: c / disc })
    }

    /// Perpendicular bisector of the segment from `p` to `q`.
    pub fn bisector(p: Complex<T>, q: Complex<T>) -> Result<Self> {
        let two = T::one() + T::one();
        let a = q.im - p.im;
        let b = -two * (q.im * p.re - p.im * q.re);
        let c = q.im * p.norm_sqr() - p.im * q.norm_sqr();
        let disc = b * b - two * two * a * c;
        if !(disc > T::zero()) {
            return Err(Error::Degenerate("bisector of coincident points".into()));
        }
        let s = disc.sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s })
    }

    #[inline]
    pub fn eval(&self, z: Complex<T>) -> T {
        self.a * z.norm_sqr() + self.b * z.re + self.c
    }

    /// `sinh` of the signed distance from `z` to the line.
    #[inline]
    pub fn sinh_signed_distance(&self, z: Complex<T>) -> T {
        self.eval(z) / z.im
    }

    pub fn negated(&self) -> Self {
        Self { a: -self.a, b: -self.b, c: -self.c }
    }

    /// Orients the line so that `z` has negative sign.
    pub fn oriented_away_from(self, z: Complex<T>) -> Result<Self> {
        let v = self.eval(z);
        if v < T::zero() {
            Ok(self)
        } else if v > T::zero() {
            Ok(self.negated())
        } else {
            Err(Error::Degenerate("base point lies on a side".into()))
        }
    }

    /// Boundary endpoints, ordered arbitrarily.
    pub fn endpoints(&self) -> (BoundaryPoint<T>, BoundaryPoint<T>) {
        let two = T::one() + T::one();
        if self.a.abs() <= T::lit(1e-15) * (self.b.abs() + self.c.abs()) {
            // vertical line b x + c = 0
            (BoundaryPoint::from_real(-self.c / self.b), BoundaryPoint::infinity())
        } else {
            // a x^2 + b x + c = 0, discriminant 1 after scaling
            let r = T::one() / (two * self.a);
            (
                BoundaryPoint::from_real((-self.b - T::one()) * r),
                BoundaryPoint::from_real((-self.b + T::one()) * r),
            )
        }
    }

    /// Point where two lines cross inside the half-plane, if any.
    pub fn intersection(&self, o: &Self) -> Option<Complex<T>> {
        let det = self.a * o.b - o.a * self.b;
        let scale = (self.a.abs() + self.b.abs()) * (o.a.abs() + o.b.abs());
        if det.abs() <= T::lit(1e-14) * scale {
            return None;
        }
        let s = (-self.c * o.b + o.c * self.b) / det;
        let x = (-self.a * o.c + o.a * self.c) / det;
        let y2 = s - x * x;
        if y2 > T::zero() {
            Some(Complex::new(x, y2.sqrt()))
        } else {
            None
        }
    }
}
