//! The foliated geodesic flow on the suspension of a representation, and
//! transverse Lyapunov exponents along its orbits.
//!
//! A state is a reduced frame together with a point of the fiber sphere,
//! expressed in the chart of the fundamental domain. Each time the base orbit
//! leaves the domain through a side with transform `T`, the fiber is pulled
//! back by `rho(T)^-1` and the log of its spherical derivative is accumulated.

mod exponent;
mod representation;
mod skew;

pub use exponent::{
    initial_state, steps_for, trajectory, trajectory_csv, transverse_lyapunov, ExponentEstimate,
    TrajectoryRow, MIN_HORIZON,
};
pub(crate) use exponent::check_ensemble;
pub use representation::{Representation, RepresentationJson, RepresentationTag, ISOMETRY_TOLERANCE};
pub use skew::{evolve, evolve_observed, random_fiber, SkewState, RENORMALIZE_EVERY};

#[cfg(test)]
mod tests;
