use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{check_ensemble, evolve_observed, initial_state, Representation};
use crate::error::{Error, Result};
use crate::gibbs::cells::{fiber_cell, fiber_cell_center, MAX_FIBER_LEVEL};
use crate::gibbs::{birkhoff_empirical, birkhoff_reversed, bl_distance, ensemble_empirical, EmpiricalMeasure, GridSpec, Recording};
use crate::surface::FuchsianGroup;
use crate::{Frame, SpherePoint};

/// Forward and time-reversed ensemble statistics and their distance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeReversal {
    /// Total variation of the joint (frame cell x fiber cell) histograms.
    pub tv: f64,
    pub plus: EmpiricalMeasure,
    pub minus: EmpiricalMeasure,
}

/// `mu+` averages `N` forward orbits from random starts; `mu-` averages the
/// backward orbits of the same starts, recorded as forward frames.
pub fn compare_time_reversal(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    seed: u64,
    t: f64,
    dt: f64,
    n: usize,
) -> Result<TimeReversal> {
    check_ensemble(t, dt, n, 1.0)?;
    let plus = ensemble_empirical(group, rep, grid, seed, t, dt, n, Recording::Forward)?;
    let minus = ensemble_empirical(group, rep, grid, seed, t, dt, n, Recording::Reversed)?;
    let tv = plus.tv_distance(&minus)?;
    Ok(TimeReversal { tv, plus, minus })
}

/// Which endpoint of the frame's geodesic defines the section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Forward,
    Backward,
}

impl Endpoint {
    pub fn of(self, f: &Frame) -> SpherePoint {
        match self {
            Endpoint::Forward => f.forward_endpoint().to_sphere(),
            Endpoint::Backward => f.backward_endpoint().to_sphere(),
        }
    }
}

/// How tightly the fiber sits on an endpoint section, per position cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub endpoint: Endpoint,
    pub fiber_level: u32,
    /// A cell passes when at least this fraction of its samples hit.
    pub cell_threshold: f64,
    /// `(hits, samples)` per position cell of the grid.
    pub per_cell: Vec<(u64, u64)>,
    pub visited_cells: usize,
    pub passing_cells: usize,
    /// Passing over visited cells.
    pub passing_fraction: f64,
    /// Hits over all samples.
    pub hit_fraction: f64,
}

/// The two fiber cells nearest to `p`: its own, and the other cell whose
/// representative point is closest.
fn nearest_two(p: &SpherePoint, level: u32, centers: &[SpherePoint]) -> (u32, u32) {
    let own = fiber_cell(p, level);
    let mut best = (u32::MAX, f64::INFINITY);
    for (k, c) in centers.iter().enumerate() {
        if k as u32 != own {
            let d = c.chordal_distance(p);
            if d < best.1 {
                best = (k as u32, d);
            }
        }
    }
    (own, best.0)
}

/// Runs `N` forward orbits and counts, per position cell of `grid`, the
/// samples whose fiber lies in one of the two fiber cells (at `fiber_level`)
/// nearest to the chosen endpoint of the current frame.
#[allow(clippy::too_many_arguments)]
pub fn section_concentration(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    seed: u64,
    t: f64,
    dt: f64,
    n: usize,
    endpoint: Endpoint,
    fiber_level: u32,
    cell_threshold: f64,
) -> Result<Concentration> {
    let steps = check_ensemble(t, dt, n, 1.0)?;
    if fiber_level == 0 || fiber_level > MAX_FIBER_LEVEL {
        return Err(Error::Precondition { field: "fiber_level", reason: format!("must lie in 1..={MAX_FIBER_LEVEL}") });
    }
    let centers: Vec<SpherePoint> = (0..1u32 << fiber_level).map(|k| fiber_cell_center(k, fiber_level)).collect();
    let cells = grid.native.base_cells() as usize;
    let domain = group.domain();
    let parts = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut tally = vec![(0u64, 0u64); cells];
            let s0 = initial_state(group, seed, i);
            evolve_observed(group, rep, &s0, dt, steps, |s| {
                let b = grid.base_cell(grid.locate(domain, &s.frame, &s.fiber)) as usize;
                let (c1, c2) = nearest_two(&endpoint.of(&s.frame), fiber_level, &centers);
                let f = fiber_cell(&s.fiber, fiber_level);
                tally[b].1 += 1;
                if f == c1 || f == c2 {
                    tally[b].0 += 1;
                }
            })?;
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_cell = vec![(0u64, 0u64); cells];
    for p in &parts {
        for (acc, x) in per_cell.iter_mut().zip(p) {
            acc.0 += x.0;
            acc.1 += x.1;
        }
    }
    let visited = per_cell.iter().filter(|c| c.1 > 0).count();
    let passing = per_cell.iter().filter(|c| c.1 > 0 && c.0 as f64 >= cell_threshold * c.1 as f64).count();
    let (hits, total) = per_cell.iter().fold((0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
    Ok(Concentration {
        endpoint,
        fiber_level,
        cell_threshold,
        per_cell,
        visited_cells: visited,
        passing_cells: passing,
        passing_fraction: if visited > 0 { passing as f64 / visited as f64 } else { 0.0 },
        hit_fraction: if total > 0 { hits as f64 / total as f64 } else { 0.0 },
    })
}

/// Starts whose forward and backward orbit averages nearly agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularFraction {
    pub horizon: f64,
    pub threshold: f64,
    /// Bounded-Lipschitz distance between the two averages, per start.
    pub distances: Vec<f64>,
    /// Share of starts with distance below `threshold`.
    pub fraction: f64,
}

/// For each of `N` random starts, the BL distance between its forward and
/// backward orbit averages over `[0, T]`.
#[allow(clippy::too_many_arguments)]
pub fn regular_fraction(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    grid: &GridSpec,
    seed: u64,
    t: f64,
    dt: f64,
    n: usize,
    threshold: f64,
) -> Result<RegularFraction> {
    check_ensemble(t, dt, n, 1.0)?;
    if !(threshold > 0.0) {
        return Err(Error::Precondition { field: "threshold", reason: format!("must be positive, got {threshold}") });
    }
    let distances = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s0 = initial_state(group, seed, i);
            let plus = birkhoff_empirical(group, rep, grid, &s0, t, dt)?;
            let minus = birkhoff_reversed(group, rep, grid, &s0, t, dt)?;
            bl_distance(&plus, &minus)
        })
        .collect::<Result<Vec<_>>>()?;
    let close = distances.iter().filter(|&&d| d < threshold).count();
    Ok(RegularFraction { horizon: t, threshold, fraction: close as f64 / n as f64, distances })
}
