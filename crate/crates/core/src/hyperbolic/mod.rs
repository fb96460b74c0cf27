//! Geometry of the hyperbolic plane: unit tangent frames in SL(2,R), boundary
//! points, and Moebius transformations of the Riemann sphere.

mod boundary;
mod frame;
mod mat;
mod sphere;

pub use boundary::BoundaryPoint;
pub use frame::{
    from_disk, hyperbolic_distance, to_disk, wrap_angle, wrap_signed, Frame, Horocycle,
    DET_TOLERANCE,
};
pub(crate) use frame::{cosh_distance_minus_one, hyperbolic_distance_unchecked};
pub use mat::{commutator, Mat2};
pub use sphere::{MatC, SpherePoint};
