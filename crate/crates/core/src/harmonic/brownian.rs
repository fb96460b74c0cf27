use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{check_ensemble, random_fiber, ExponentEstimate, Representation, TrajectoryRow};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::surface::FuchsianGroup;
use crate::{Complex, SpherePoint};

/// Largest accepted Brownian time step.
pub const MAX_BROWNIAN_DT: f64 = 1e-2;

/// Scale of the Brownian generator: the paths are generated by
/// `generator_scale * Laplacian`. The default `1` makes the escape rate of
/// the radial process equal to one in curvature -1; `0` switches the noise
/// off, which leaves positions fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianConfig {
    pub generator_scale: f64,
}

impl Default for BrownianConfig {
    fn default() -> Self {
        Self { generator_scale: 1.0 }
    }
}

impl BrownianConfig {
    /// Diffusion coefficient `sigma` in `dx = sigma y dW1`, `dy = sigma y dW2`.
    pub fn sigma(&self) -> f64 {
        (2.0 * self.generator_scale).sqrt()
    }

    fn check(&self) -> Result<()> {
        if self.generator_scale >= 0.0 && self.generator_scale.is_finite() {
            Ok(())
        } else {
            Err(Error::Precondition {
                field: "generator_scale",
                reason: format!("must be nonnegative, got {}", self.generator_scale),
            })
        }
    }
}

/// A Brownian path on the surface with its fiber holonomy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianState {
    /// Reduced to the fundamental domain.
    pub position: Complex,
    pub fiber: SpherePoint,
    pub log_deriv: f64,
    pub time: f64,
}

impl BrownianState {
    pub fn new(group: &FuchsianGroup<f64>, rep: &Representation, position: Complex, fiber: SpherePoint) -> Result<Self> {
        let mut fiber = fiber;
        let sides = group.domain().sides();
        let position = group.domain().reduce_point_with(position, |k| {
            rep.pull_back(sides[k].letter, &mut fiber);
        })?;
        Ok(Self { position, fiber, log_deriv: 0.0, time: 0.0 })
    }

    /// Uniform point of the domain with a round-random fiber.
    pub fn random<R: Rng + ?Sized>(group: &FuchsianGroup<f64>, rng: &mut R) -> Self {
        let position = group.domain().sample_uniform(rng);
        Self { position, fiber: random_fiber(rng), log_deriv: 0.0, time: 0.0 }
    }
}

/// One step in the half-plane from given standard normal increments: exact
/// log-normal update of `y`, Euler update of `x` with the current `y`.
#[inline]
pub fn half_plane_step(z: Complex, dt: f64, sigma: f64, n1: f64, n2: f64) -> Complex {
    let s = dt.sqrt();
    let y = z.im;
    Complex::new(z.re + sigma * y * s * n1, y * (sigma * s * n2 - 0.5 * sigma * sigma * dt).exp())
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt <= MAX_BROWNIAN_DT {
        Ok(())
    } else {
        Err(Error::Precondition { field: "dt", reason: format!("must lie in (0, {MAX_BROWNIAN_DT}], got {dt}") })
    }
}

/// Advances one step, reducing to the domain and carrying the fiber across
/// every crossing exactly as the geodesic skew product does.
pub fn brownian_advance<R: Rng + ?Sized>(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    s: &BrownianState,
    dt: f64,
    config: &BrownianConfig,
    rng: &mut R,
) -> Result<BrownianState> {
    check_dt(dt)?;
    config.check()?;
    let n1: f64 = StandardNormal.sample(rng);
    let n2: f64 = StandardNormal.sample(rng);
    step_reduced(group, rep, s, dt, config.sigma(), n1, n2)
}

#[inline]
fn step_reduced(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    s: &BrownianState,
    dt: f64,
    sigma: f64,
    n1: f64,
    n2: f64,
) -> Result<BrownianState> {
    let z = half_plane_step(s.position, dt, sigma, n1, n2);
    let sides = group.domain().sides();
    let mut fiber = s.fiber;
    let mut log = 0.0;
    let position = group.domain().reduce_point_with(z, |k| {
        log += rep.pull_back(sides[k].letter, &mut fiber);
    })?;
    Ok(BrownianState { position, fiber, log_deriv: s.log_deriv + log, time: s.time + dt })
}

/// `n_steps` steps, calling `observe` before each.
#[allow(clippy::too_many_arguments)]
pub fn brownian_evolve<R: Rng + ?Sized>(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    s: &BrownianState,
    dt: f64,
    n_steps: u64,
    config: &BrownianConfig,
    rng: &mut R,
    mut observe: impl FnMut(&BrownianState),
) -> Result<BrownianState> {
    check_dt(dt)?;
    config.check()?;
    let sigma = config.sigma();
    let mut st = *s;
    for _ in 0..n_steps {
        observe(&st);
        let n1: f64 = StandardNormal.sample(rng);
        let n2: f64 = StandardNormal.sample(rng);
        st = step_reduced(group, rep, &st, dt, sigma, n1, n2)?;
    }
    Ok(st)
}

/// Transverse exponent along Brownian paths from uniform starts.
#[allow(clippy::too_many_arguments)]
pub fn brownian_lyapunov(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    seed: u64,
    t: f64,
    dt: f64,
    n: usize,
    config: &BrownianConfig,
) -> Result<ExponentEstimate> {
    let steps = check_ensemble(t, dt, n, MAX_BROWNIAN_DT)?;
    config.check()?;
    let horizon = steps as f64 * dt;
    let values = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Brownian, i);
            let s0 = BrownianState::random(group, &mut rng);
            let s = brownian_evolve(group, rep, &s0, dt, steps, config, &mut rng, |_| {})?;
            Ok(s.log_deriv / horizon)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ExponentEstimate::from_samples(values, horizon, dt, steps))
}

/// Trajectory rows in the geodesic export schema; the angle column is `NaN`.
#[allow(clippy::too_many_arguments)]
pub fn brownian_trajectory<R: Rng + ?Sized>(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    s: &BrownianState,
    dt: f64,
    n_steps: u64,
    config: &BrownianConfig,
    rng: &mut R,
) -> Result<Vec<TrajectoryRow>> {
    let row = |s: &BrownianState| {
        let w = s.fiber.affine().unwrap_or(Complex::new(f64::INFINITY, 0.0));
        TrajectoryRow {
            t: s.time,
            re: s.position.re,
            im: s.position.im,
            angle: f64::NAN,
            fiber_re: w.re,
            fiber_im: w.im,
            log_deriv: s.log_deriv,
        }
    };
    let mut rows = Vec::with_capacity(n_steps as usize + 1);
    let last = brownian_evolve(group, rep, s, dt, n_steps, config, rng, |st| rows.push(row(st)))?;
    rows.push(row(&last));
    Ok(rows)
}

/// Endpoints after `n_steps` of unreduced half-plane Brownian motion from
/// `z0`, one per path. With `split`, each step is taken as two half steps
/// driven by increments whose sum drives the full step.
pub fn half_plane_endpoints(
    z0: Complex,
    dt: f64,
    n_steps: u64,
    paths: usize,
    config: &BrownianConfig,
    seed: u64,
    split: bool,
) -> Result<Vec<Complex>> {
    check_dt(dt)?;
    config.check()?;
    let sigma = config.sigma();
    (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Brownian, i);
            let mut z = z0;
            for _ in 0..n_steps {
                let a: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                if split {
                    z = half_plane_step(z, 0.5 * dt, sigma, a[0], a[1]);
                    z = half_plane_step(z, 0.5 * dt, sigma, a[2], a[3]);
                } else {
                    let r = std::f64::consts::FRAC_1_SQRT_2;
                    z = half_plane_step(z, dt, sigma, r * (a[0] + a[2]), r * (a[1] + a[3]));
                }
            }
            Ok(z)
        })
        .collect()
}
