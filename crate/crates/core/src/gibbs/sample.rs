use rayon::prelude::*;

use crate::cocycle::{evolve, evolve_observed, initial_state, steps_for, Representation, SkewState};
use crate::error::{Error, Result};
use crate::gibbs::{Counter, EmpiricalMeasure, GridSpec, Recording, Source};
use crate::hyperbolic::Horocycle;
use crate::surface::FuchsianGroup;
use crate::{Frame, SpherePoint};

fn sample_count(t: f64, dt: f64) -> Result<u64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Precondition { field: "T", reason: format!("must be positive, got {t}") });
    }
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(Error::Precondition { field: "dt", reason: format!("must lie in (0, 1], got {dt}") });
    }
    let n = steps_for(t, dt);
    if n == 0 {
        return Err(Error::Precondition { field: "T", reason: format!("shorter than one step ({t} < {dt})") });
    }
    Ok(n)
}

/// Histogram of `steps` states of one orbit, taken before each step.
pub fn record_orbit(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    source: Source,
) -> Result<EmpiricalMeasure> {
    let domain = group.domain();
    let mut counter = Counter::new();
    match source.recording {
        Recording::Forward => {
            evolve_observed(group, rep, &source.start, source.dt, source.steps, |s| {
                counter.add(grid.locate(domain, &s.frame, &s.fiber));
            })?;
        }
        Recording::Reversed => {
            let back = source.start.time_reversed();
            evolve_observed(group, rep, &back, source.dt, source.steps, |s| {
                counter.add(grid.locate(domain, &s.frame.time_reversed(), &s.fiber));
            })?;
        }
    }
    counter.finish(grid.clone(), vec![source])
}

/// Time average of the orbit of `p` over `[0, T)`: `floor(T / dt)` equally
/// weighted samples at `0, dt, 2 dt, ...`.
pub fn birkhoff_empirical(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    p: &SkewState,
    t: f64,
    dt: f64,
) -> Result<EmpiricalMeasure> {
    let steps = sample_count(t, dt)?;
    record_orbit(group, rep, grid, Source { start: *p, dt, steps, weight: 1.0, recording: Recording::Forward })
}

/// Time average of the backward orbit of `p` over `[0, T)`, as a measure on
/// forward frames.
pub fn birkhoff_reversed(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    p: &SkewState,
    t: f64,
    dt: f64,
) -> Result<EmpiricalMeasure> {
    let steps = sample_count(t, dt)?;
    record_orbit(group, rep, grid, Source { start: *p, dt, steps, weight: 1.0, recording: Recording::Reversed })
}

/// Per-orbit time averages from `n` random starts, in orbit order.
#[allow(clippy::too_many_arguments)]
pub fn orbit_measures(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    seed: u64,
    t: f64,
    dt: f64,
    n: usize,
    recording: Recording,
) -> Result<Vec<EmpiricalMeasure>> {
    let steps = sample_count(t, dt)?;
    if n == 0 {
        return Err(Error::Precondition { field: "N", reason: "at least one orbit is required".into() });
    }
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let start = initial_state(group, seed, i);
            record_orbit(group, rep, grid, Source { start, dt, steps, weight: 1.0, recording })
        })
        .collect()
}

/// Uniform mixture of [`orbit_measures`].
#[allow(clippy::too_many_arguments)]
pub fn ensemble_empirical(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    seed: u64,
    t: f64,
    dt: f64,
    n: usize,
    recording: Recording,
) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::uniform_mixture(&orbit_measures(group, rep, grid, seed, t, dt, n, recording)?)
}

/// Average of the time averages along `n_samples` points of the unstable
/// horocycle arc of length `arc_len` centred at `g`, all lifted to the fiber
/// point `fiber` (the arc lies in one leaf).
#[allow(clippy::too_many_arguments)]
pub fn unstable_arc_empirical(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    g: &Frame,
    fiber: &SpherePoint,
    arc_len: f64,
    n_samples: usize,
    t: f64,
    dt: f64,
) -> Result<EmpiricalMeasure> {
    if !(arc_len > 0.0) || !arc_len.is_finite() {
        return Err(Error::Precondition { field: "arc_len", reason: format!("must be positive, got {arc_len}") });
    }
    if n_samples == 0 {
        return Err(Error::Precondition { field: "n_samples", reason: "at least one sample".into() });
    }
    let steps = sample_count(t, dt)?;
    let parts = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            let s = arc_len * ((j as f64 + 0.5) / n_samples as f64 - 0.5);
            let frame = g.horocycle_advance(s, Horocycle::Unstable);
            let start = SkewState::new(group, rep, frame, *fiber)?;
            record_orbit(group, rep, grid, Source { start, dt, steps, weight: 1.0, recording: Recording::Forward })
        })
        .collect::<Result<Vec<_>>>()?;
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().expect("one part"));
    }
    EmpiricalMeasure::uniform_mixture(&parts)
}

/// Total variation between a time-average measure and its push-forward by
/// the flow for time `s` (rounded to whole steps), which is the time average
/// over the shifted window.
pub fn invariance_defect(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    m: &EmpiricalMeasure,
    s: f64,
) -> Result<f64> {
    let sources = m.sources();
    let first = sources
        .first()
        .ok_or_else(|| Error::Precondition { field: "m", reason: "not built from orbit averages".into() })?;
    let horizon = first.steps as f64 * first.dt;
    if !(s > 0.0 && s <= horizon / 10.0) {
        return Err(Error::Precondition { field: "s", reason: format!("must lie in (0, T/10] = (0, {}], got {s}", horizon / 10.0) });
    }
    let pushed = sources
        .par_iter()
        .map(|src| {
            let k = ((s / src.dt).round() as u64).max(1);
            shifted_window(group, rep, m.grid(), src, k)
        })
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = sources.iter().map(|s| s.weight).collect();
    let image = if pushed.len() == 1 { pushed.into_iter().next().expect("one part") } else { EmpiricalMeasure::mixture(&pushed, &weights)? };
    m.tv_distance(&image)
}

/// The same orbit segment with its time window moved `k` steps forward.
/// Every state is computed along the original orbit, so no round-off
/// divergence enters the comparison.
fn shifted_window(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    src: &Source,
    k: u64,
) -> Result<EmpiricalMeasure> {
    match src.recording {
        Recording::Forward => {
            let start = evolve(group, rep, &src.start, src.dt, k)?;
            record_orbit(group, rep, grid, Source { start, ..*src })
        }
        Recording::Reversed => {
            let domain = group.domain();
            let mut counter = Counter::new();
            let k = k.min(src.steps);
            let first = evolve(group, rep, &src.start, src.dt, 1)?;
            evolve_observed(group, rep, &first, src.dt, k, |s| counter.add(grid.locate(domain, &s.frame, &s.fiber)))?;
            let back = src.start.time_reversed();
            evolve_observed(group, rep, &back, src.dt, src.steps - k, |s| {
                counter.add(grid.locate(domain, &s.frame.time_reversed(), &s.fiber));
            })?;
            counter.finish(grid.clone(), vec![*src])
        }
    }
}
