use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::hyperbolic::SpherePoint;
use crate::scalar::Real;

/// Point of the real projective line `(p : q)`, the boundary of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint<T> {
    pub p: T,
    pub q: T,
}

impl<T: Real> BoundaryPoint<T> {
    #[inline]
    pub const fn new(p: T, q: T) -> Self {
        Self { p, q }
    }

    pub fn from_real(x: T) -> Self {
        Self::new(x, T::one())
    }

    pub fn infinity() -> Self {
        Self::new(T::one(), T::zero())
    }

    /// `p / q`, or `None` at infinity.
    pub fn value(&self) -> Option<T> {
        if self.q == T::zero() {
            None
        } else {
            Some(self.p / self.q)
        }
    }

    pub fn is_infinite_within(&self, tol: T) -> bool {
        self.q.abs() <= tol * self.p.abs()
    }

    /// Chordal distance on the unit circle, in `[0, 1]`; zero iff the points agree.
    pub fn distance(&self, o: &Self) -> T {
        let n = ((self.p * self.p + self.q * self.q) * (o.p * o.p + o.q * o.q)).sqrt();
        (self.p * o.q - self.q * o.p).abs() / n
    }

    pub fn to_sphere(&self) -> SpherePoint<T> {
        SpherePoint::new_unchecked(
            Complex::new(self.p, T::zero()),
            Complex::new(self.q, T::zero()),
        )
    }
}
