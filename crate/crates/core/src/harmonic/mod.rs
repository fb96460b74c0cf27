//! Brownian motion on the leaves, its transverse exponent, and the Poisson
//! kernel pairing identity on a single plaque.

mod brownian;
mod candel;
mod poisson;

pub use brownian::{
    brownian_advance, brownian_evolve, brownian_lyapunov, brownian_trajectory, half_plane_endpoints, half_plane_step,
    BrownianConfig, BrownianState, MAX_BROWNIAN_DT,
};
pub use candel::{
    candel_identity_residual, candel_refinement, BoundaryMeasure, IdentityReport, LogDensity, QuadratureParams,
    Refinement,
};
pub use poisson::{poisson_kernel, DiskField, MIN_DISK_GRID};
