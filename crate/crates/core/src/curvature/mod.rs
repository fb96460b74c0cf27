//! Geodesic flow of a conformally perturbed hyperbolic metric, with the
//! Riccati equation for the unstable Jacobian.
//!
//! The metric is `e^{2 phi}` times the hyperbolic one, with `phi` a sum of
//! bumps over an orbit of the group. Its curvature is
//! `K = e^{-2 phi} (-1 - Δ phi)` where `Δ` is the hyperbolic Laplacian. In the
//! unstable direction, `u = d/dt log Det D^u X_t` solves `u' = -u^2 - K`.

mod flow;
mod metric;
mod unstable;

pub use flow::{
    extend_log_jacobian, geodesic_riccati_step, min_washout, unstable_log_jacobian, washed_out_u, GeodesicVCState,
    JacobianLog, STEP,
};
pub use metric::{
    build_invariant_bump, random_direction_state, BumpSpec, ConformalMetric, LocalGeometry, MetricSpec, Pinch,
    INVARIANCE_PROBES, MAX_EPSILON, MAX_WORD_RADIUS, MIN_WORD_RADIUS, SUPPORT_RADIUS,
};
pub use unstable::{
    distortion_constant, psi_u, unstable_family, unstable_pair, DistortionReport, PsiReport, UnstablePair,
    DEFAULT_BACK_TIME, MIN_PSI_HORIZON,
};

#[cfg(test)]
mod tests;
