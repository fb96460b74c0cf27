//! Simulation and analysis of the foliated geodesic flow of flat Riemann-sphere
//! bundles over hyperbolic surfaces.
//!
//! The geometry layer ([`hyperbolic`], [`surface`]) is generic over the scalar
//! type. The simulation layers work in `f64`; the aliases below name the
//! concrete types they use.

// Guards are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hyperbolic;
pub mod surface;
pub mod scalar;
pub mod rng;
pub mod stats;
pub mod cocycle;
pub mod gibbs;
pub mod harmonic;
pub mod curvature;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Frame = hyperbolic::Frame<f64>;
pub type Mat2 = hyperbolic::Mat2<f64>;
pub type MatC = hyperbolic::MatC<f64>;
pub type SpherePoint = hyperbolic::SpherePoint<f64>;
pub type BoundaryPoint = hyperbolic::BoundaryPoint<f64>;
pub type Complex = num_complex::Complex<f64>;
