use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cocycle::SkewState;
use crate::error::{Error, Result};
use crate::gibbs::GridSpec;

/// How the states of an orbit were recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recording {
    /// States of the forward orbit of `start`.
    Forward,
    /// Run forward from `start.time_reversed()`, recording each state reversed back.
    Reversed,
}

/// The orbit segment behind a time-average measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub start: SkewState,
    pub dt: f64,
    pub steps: u64,
    pub weight: f64,
    pub recording: Recording,
}

/// Histogram of a probability measure on the native cells of a grid.
///
/// Cells are kept sparse and sorted by index. Measures built from orbit
/// averages remember their orbits, so they can be pushed forward by the flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    grid: GridSpec,
    cells: Vec<(u32, f64)>,
    samples: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sources: Vec<Source>,
}

/// Accumulates counts before normalization.
#[derive(Clone, Debug, Default)]
pub struct Counter {
    counts: HashMap<u32, u64>,
    total: u64,
}

impl Counter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, cell: u32) {
        *self.counts.entry(cell).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn finish(self, grid: GridSpec, sources: Vec<Source>) -> Result<EmpiricalMeasure> {
        if self.total == 0 {
            return Err(Error::Degenerate("no samples".into()));
        }
        let n = self.total as f64;
        let mut cells: Vec<(u32, f64)> = self.counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect();
        cells.sort_unstable_by_key(|c| c.0);
        Ok(EmpiricalMeasure { grid, cells, samples: self.total, sources })
    }
}

impl EmpiricalMeasure {
    /// Unit mass on one cell.
    pub fn atom(grid: GridSpec, cell: u32) -> Result<Self> {
        if u64::from(cell) >= grid.cells() {
            return Err(Error::Precondition { field: "cell", reason: format!("{cell} out of range") });
        }
        Ok(Self { grid, cells: vec![(cell, 1.0)], samples: 1, sources: Vec::new() })
    }

    /// Normalizes nonnegative cell masses.
    pub fn from_masses(grid: GridSpec, masses: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for (k, m) in masses {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::Precondition { field: "mass", reason: format!("{m} is not a nonnegative number") });
            }
            if u64::from(k) >= grid.cells() {
                return Err(Error::Precondition { field: "cell", reason: format!("{k} out of range") });
            }
            *acc.entry(k).or_insert(0.0) += m;
        }
        let mut cells: Vec<(u32, f64)> = acc.into_iter().filter(|c| c.1 > 0.0).collect();
        cells.sort_unstable_by_key(|c| c.0);
        let total: f64 = cells.iter().map(|c| c.1).sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("zero total mass".into()));
        }
        for c in &mut cells {
            c.1 /= total;
        }
        Ok(Self { grid, cells, samples: 0, sources: Vec::new() })
    }

    /// Weighted average; weights are normalized, merge order is the input order.
    pub fn mixture(parts: &[EmpiricalMeasure], weights: &[f64]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Precondition { field: "measures", reason: "empty".into() })?;
        if weights.len() != parts.len() {
            return Err(Error::Precondition { field: "weights", reason: "one weight per measure".into() });
        }
        let wsum: f64 = weights.iter().sum();
        if !(wsum > 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Precondition { field: "weights", reason: "nonnegative with positive sum".into() });
        }
        let mut acc: HashMap<u32, f64> = HashMap::new();
        let mut sources = Vec::new();
        let mut samples = 0;
        for (m, &w) in parts.iter().zip(weights) {
            first.check_grid(m)?;
            let w = w / wsum;
            for &(k, v) in &m.cells {
                *acc.entry(k).or_insert(0.0) += w * v;
            }
            sources.extend(m.sources.iter().map(|s| Source { weight: s.weight * w, ..*s }));
            samples += m.samples;
        }
        let mut cells: Vec<(u32, f64)> = acc.into_iter().collect();
        cells.sort_unstable_by_key(|c| c.0);
        Ok(Self { grid: first.grid.clone(), cells, samples, sources })
    }

    pub fn uniform_mixture(parts: &[EmpiricalMeasure]) -> Result<Self> {
        Self::mixture(parts, &vec![1.0; parts.len()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `(cell index, mass)` pairs in increasing index order, zero cells omitted.
    pub fn cells(&self) -> &[(u32, f64)] {
        &self.cells
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.1).sum()
    }

    pub fn mass(&self, cell: u32) -> f64 {
        self.cells.binary_search_by_key(&cell, |c| c.0).map(|i| self.cells[i].1).unwrap_or(0.0)
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid.native, other.grid.native)))
        }
    }

    /// Masses of the position cells, dense.
    pub fn base_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.native.base_cells() as usize];
        for &(k, v) in &self.cells {
            out[self.grid.base_cell(k) as usize] += v;
        }
        out
    }

    /// Masses of the fiber cells at the native level, dense.
    pub fn fiber_marginal(&self) -> Vec<f64> {
        let mask = self.grid.native.fiber_cells() - 1;
        let mut out = vec![0.0; self.grid.native.fiber_cells() as usize];
        for &(k, v) in &self.cells {
            out[(k & mask) as usize] += v;
        }
        out
    }

    /// Total variation distance (half the L1 distance) of native cell masses.
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        let (a, b) = (&self.cells, &other.cells);
        let (mut i, mut j) = (0, 0);
        let mut l1 = 0.0;
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    l1 += (x.1 - y.1).abs();
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    l1 += x.1;
                    i += 1;
                }
                (Some(x), None) => {
                    l1 += x.1;
                    i += 1;
                }
                (_, Some(y)) => {
                    l1 += y.1;
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok((0.5 * l1).min(1.0))
    }

    /// Dense histogram at one of the grid scales.
    pub fn at_scale(&self, scale: usize) -> Vec<f64> {
        let r = &self.grid.scales[scale];
        let mut out = vec![0.0; r.cells() as usize];
        for &(k, v) in &self.cells {
            out[self.grid.coarsen(k, r) as usize] += v;
        }
        out
    }

    pub fn to_json(&self) -> MeasureJson {
        MeasureJson { gridspec: self.grid.clone(), cells: self.cells.iter().map(|&(k, v)| (k, v)).collect() }
    }

    /// One row per nonzero cell: `cell,radial,angular,direction,fiber,mass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,radial,angular,direction,fiber,mass\n");
        for &(k, v) in &self.cells {
            let c = self.grid.decode(k);
            out.push_str(&format!("{k},{},{},{},{},{v}\n", c.radial, c.angular, c.direction, c.fiber));
        }
        out
    }
}

/// `{"gridspec": ..., "cells": [[index, mass], ...]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub gridspec: GridSpec,
    pub cells: Vec<(u32, f64)>,
}

impl MeasureJson {
    pub fn build(&self) -> Result<EmpiricalMeasure> {
        let g = GridSpec::new(self.gridspec.native, self.gridspec.scales.clone())?;
        EmpiricalMeasure::from_masses(g, self.cells.iter().copied())
    }
}

/// Bounded-Lipschitz distance: the mean over the grid scales of the total
/// variation distance between the coarsened histograms.
pub fn bl_distance(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure) -> Result<f64> {
    m1.check_grid(m2)?;
    let scales = &m1.grid.scales;
    if scales.is_empty() {
        return m1.tv_distance(m2);
    }
    let mut total = 0.0;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in scales {
        for (buf, m) in [(&mut a, m1), (&mut b, m2)] {
            buf.clear();
            buf.resize(r.cells() as usize, 0.0);
            for &(k, v) in &m.cells {
                buf[m.grid.coarsen(k, r) as usize] += v;
            }
        }
        total += 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    }
    Ok((total / scales.len() as f64).min(1.0))
}
