use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{evolve, evolve_observed, Representation, SkewState};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::stats::{mean, standard_error, Z95};
use crate::surface::FuchsianGroup;

/// Smallest horizon accepted by the exponent estimators.
pub const MIN_HORIZON: f64 = 100.0;

/// Ensemble estimate of a Lyapunov exponent per unit time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub per_orbit: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub orbits: usize,
    pub steps_per_orbit: u64,
}

impl ExponentEstimate {
    pub fn from_samples(per_orbit: Vec<f64>, horizon: f64, dt: f64, steps_per_orbit: u64) -> Self {
        Self {
            mean: mean(&per_orbit),
            stderr: standard_error(&per_orbit),
            orbits: per_orbit.len(),
            per_orbit,
            horizon,
            dt,
            steps_per_orbit,
        }
    }

    /// Half-width of the normal 95% interval.
    pub fn ci95(&self) -> f64 {
        Z95 * self.stderr
    }
}

pub(crate) fn check_ensemble(t: f64, dt: f64, n: usize, dt_max: f64) -> Result<u64> {
    if !(t >= MIN_HORIZON) || !t.is_finite() {
        return Err(Error::Precondition { field: "T", reason: format!("must be at least {MIN_HORIZON}, got {t}") });
    }
    if !(dt > 0.0 && dt <= dt_max) {
        return Err(Error::Precondition { field: "dt", reason: format!("must lie in (0, {dt_max}], got {dt}") });
    }
    if n == 0 {
        return Err(Error::Precondition { field: "N", reason: "at least one orbit is required".into() });
    }
    Ok(steps_for(t, dt))
}

/// Number of steps covering `[0, t)`.
pub fn steps_for(t: f64, dt: f64) -> u64 {
    let r = t / dt;
    let k = r.round();
    // tolerate representation error in t / dt, otherwise round down
    if (r - k).abs() <= 1e-9 * r.max(1.0) {
        k as u64
    } else {
        r.floor() as u64
    }
}

/// Random initial state of orbit `index` of an ensemble seeded by `seed`.
pub fn initial_state(group: &FuchsianGroup<f64>, seed: u64, index: u64) -> SkewState {
    let mut rng = stream(seed, Purpose::InitialState, index);
    SkewState::random(group, &mut rng)
}

/// Transverse exponent along geodesic orbits from Liouville x round random starts.
pub fn transverse_lyapunov(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    seed: u64,
    t: f64,
    dt: f64,
    n: usize,
) -> Result<ExponentEstimate> {
    let steps = check_ensemble(t, dt, n, 1.0)?;
    let horizon = steps as f64 * dt;
    let values = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s0 = initial_state(group, seed, i);
            let s = evolve(group, rep, &s0, dt, steps)?;
            Ok(s.log_deriv / horizon)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ExponentEstimate::from_samples(values, horizon, dt, steps))
}

/// One row of a trajectory export.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub angle: f64,
    pub fiber_re: f64,
    pub fiber_im: f64,
    pub log_deriv: f64,
}

impl TrajectoryRow {
    pub fn from_state(s: &SkewState) -> Self {
        let z = s.base_point();
        let w = s.fiber.affine().unwrap_or(crate::Complex::new(f64::INFINITY, 0.0));
        Self { t: s.time, re: z.re, im: z.im, angle: s.frame.direction(), fiber_re: w.re, fiber_im: w.im, log_deriv: s.log_deriv }
    }
}

/// Samples `n_steps + 1` states, the initial one included.
pub fn trajectory(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    s: &SkewState,
    dt: f64,
    n_steps: u64,
) -> Result<Vec<TrajectoryRow>> {
    let mut rows = Vec::with_capacity(n_steps as usize + 1);
    let last = evolve_observed(group, rep, s, dt, n_steps, |st| rows.push(TrajectoryRow::from_state(st)))?;
    rows.push(TrajectoryRow::from_state(&last));
    Ok(rows)
}

/// CSV text with header `t,re_base,im_base,angle,fiber_affine_re,fiber_affine_im,log_deriv`,
/// plus a leading `path_type` column when given.
pub fn trajectory_csv(rows: &[TrajectoryRow], path_type: Option<&str>) -> String {
    let mut out = String::new();
    if path_type.is_some() {
        out.push_str("path_type,");
    }
    out.push_str("t,re_base,im_base,angle,fiber_affine_re,fiber_affine_im,log_deriv\n");
    for r in rows {
        if let Some(p) = path_type {
            out.push_str(p);
            out.push(',');
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.t, r.re, r.im, r.angle, r.fiber_re, r.fiber_im, r.log_deriv
        ));
    }
    out
}
