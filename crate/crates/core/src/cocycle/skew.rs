use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cocycle::Representation;
use crate::error::{Error, Result};
use crate::surface::FuchsianGroup;
use crate::{Complex, Frame, SpherePoint};

/// Frames are renormalized whenever the step counter is a multiple of this.
pub const RENORMALIZE_EVERY: u64 = 1000;

/// One orbit of the foliated geodesic flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewState {
    /// Reduced to the fundamental domain.
    pub frame: Frame,
    pub fiber: SpherePoint,
    /// Accumulated log of the spherical derivative of the fiber holonomy.
    pub log_deriv: f64,
    pub time: f64,
    /// Steps taken since construction; drives periodic renormalization.
    pub steps: u64,
}

impl SkewState {
    /// Reduces `frame` and carries `fiber` along with it.
    pub fn new(group: &FuchsianGroup<f64>, rep: &Representation, frame: Frame, fiber: SpherePoint) -> Result<Self> {
        let mut fiber = fiber;
        let sides = group.domain().sides();
        let frame = group.domain().reduce_frame_with(&frame, |k| {
            rep.pull_back(sides[k].letter, &mut fiber);
        })?;
        Ok(Self { frame, fiber, log_deriv: 0.0, time: 0.0, steps: 0 })
    }

    /// Liouville-random frame in the domain with a round-random fiber.
    pub fn random<R: Rng + ?Sized>(group: &FuchsianGroup<f64>, rng: &mut R) -> Self {
        let z = group.domain().sample_uniform(rng);
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let frame = Frame::from_point_angle(z, theta).expect("sampled point lies in the half-plane");
        Self { frame, fiber: random_fiber(rng), log_deriv: 0.0, time: 0.0, steps: 0 }
    }

    /// Reverses the direction of the frame; fiber and accumulators are kept.
    pub fn time_reversed(&self) -> Self {
        Self { frame: self.frame.time_reversed(), ..*self }
    }

    pub fn base_point(&self) -> Complex {
        self.frame.base_point()
    }
}

/// Uniform point for the round measure of the sphere.
pub fn random_fiber<R: Rng + ?Sized>(rng: &mut R) -> SpherePoint {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        if let Ok(p) = SpherePoint::new(Complex::new(v[0], v[1]), Complex::new(v[2], v[3])) {
            return p;
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt <= 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition { field: "dt", reason: format!("must lie in (0, 1], got {dt}") })
    }
}

/// Advances `n_steps` steps of length `dt`.
pub fn evolve(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    s: &SkewState,
    dt: f64,
    n_steps: u64,
) -> Result<SkewState> {
    evolve_observed(group, rep, s, dt, n_steps, |_| {})
}

/// As [`evolve`], calling `observe` on the state before each step
/// (so at times `t0, t0 + dt, ..., t0 + (n-1) dt`).
pub fn evolve_observed(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    s: &SkewState,
    dt: f64,
    n_steps: u64,
    mut observe: impl FnMut(&SkewState),
) -> Result<SkewState> {
    check_dt(dt)?;
    let domain = group.domain();
    let sides = domain.sides();
    let l = (0.5 * dt).exp();
    let mut st = *s;
    for _ in 0..n_steps {
        observe(&st);
        let moved = st.frame.scale_by(l);
        let mut fiber = st.fiber;
        let mut log = 0.0;
        let frame = domain.reduce_frame_with(&moved, |k| {
            log += rep.pull_back(sides[k].letter, &mut fiber);
        })?;
        st.steps += 1;
        st.frame = if st.steps.is_multiple_of(RENORMALIZE_EVERY) { frame.renormalized() } else { frame };
        st.fiber = fiber;
        st.log_deriv += log;
        st.time += dt;
    }
    Ok(st)
}
