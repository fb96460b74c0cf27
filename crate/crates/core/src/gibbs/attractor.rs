use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{Representation, SkewState};
use crate::error::{Error, Result};
use crate::gibbs::{birkhoff_empirical, bl_distance, EmpiricalMeasure, GridSpec};
use crate::rng::{stream, Purpose};
use crate::stats::wilson_interval;
use crate::surface::FuchsianGroup;
use crate::{Complex, Frame, SpherePoint};

/// Clusters of probe measures under the bounded-Lipschitz distance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttractorSet {
    pub representatives: Vec<EmpiricalMeasure>,
    /// Cluster of each input measure.
    pub labels: Vec<usize>,
    pub epsilon: f64,
    /// Smallest distance between two representatives (infinite for one cluster).
    pub min_separation: f64,
}

impl AttractorSet {
    pub fn count(&self) -> usize {
        self.representatives.len()
    }

    /// Whether representatives are further than `2 epsilon` apart.
    pub fn well_separated(&self) -> bool {
        self.min_separation > 2.0 * self.epsilon
    }

    /// Same attractors listed in another order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let k = self.count();
        let mut seen = vec![false; k];
        for &i in order {
            if i >= k || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Precondition { field: "order", reason: "not a permutation".into() });
            }
        }
        if order.len() != k {
            return Err(Error::Precondition { field: "order", reason: "not a permutation".into() });
        }
        let mut inverse = vec![0; k];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        Ok(Self {
            representatives: order.iter().map(|&i| self.representatives[i].clone()).collect(),
            labels: self.labels.iter().map(|&l| inverse[l]).collect(),
            epsilon: self.epsilon,
            min_separation: self.min_separation,
        })
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// All pairwise distances `(i, j, d)` with `i < j`, in lexicographic order.
pub fn pairwise_bl(measures: &[EmpiricalMeasure]) -> Result<Vec<(usize, usize, f64)>> {
    let n = measures.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pairs.into_par_iter().map(|(i, j)| Ok((i, j, bl_distance(&measures[i], &measures[j])?))).collect()
}

/// Single-linkage clustering at radius `epsilon` (pairs closer than `epsilon`
/// are linked). Clusters are numbered by their first member; each
/// representative is the equal-weight average of its members.
pub fn classify_attractors(measures: &[EmpiricalMeasure], epsilon: f64) -> Result<AttractorSet> {
    if measures.is_empty() {
        return Err(Error::Precondition { field: "measures", reason: "empty".into() });
    }
    if !(epsilon > 0.0) {
        return Err(Error::Precondition { field: "epsilon", reason: format!("must be positive, got {epsilon}") });
    }
    let n = measures.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for (i, j, d) in pairwise_bl(measures)? {
        if d < epsilon {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut root_label: Vec<Option<usize>> = vec![None; n];
    let mut labels = Vec::with_capacity(n);
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let l = *root_label[r].get_or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[l].push(i);
        labels.push(l);
    }
    let representatives = members
        .iter()
        .map(|m| {
            let parts: Vec<EmpiricalMeasure> = m.iter().map(|&i| measures[i].clone()).collect();
            EmpiricalMeasure::uniform_mixture(&parts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut min_separation = f64::INFINITY;
    for i in 0..representatives.len() {
        for j in i + 1..representatives.len() {
            min_separation = min_separation.min(bl_distance(&representatives[i], &representatives[j])?);
        }
    }
    Ok(AttractorSet { representatives, labels, epsilon, min_separation })
}

/// Fractions of directions at a point whose orbits settle near each attractor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    pub point: Complex,
    pub fiber: SpherePoint,
    pub directions: usize,
    /// Over labeled directions; sums to one when any direction is labeled.
    pub f: Vec<f64>,
    /// Half-widths of 95% Wilson intervals, per attractor.
    pub half_widths: Vec<f64>,
    pub counts: Vec<usize>,
    pub unlabeled: usize,
    pub unlabeled_fraction: f64,
}

/// Label of an orbit measure: nearest representative, if closer than epsilon.
pub fn label_measure(attractors: &AttractorSet, m: &EmpiricalMeasure) -> Result<Option<usize>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in attractors.representatives.iter().enumerate() {
        let d = bl_distance(r, m)?;
        if best.is_none_or(|b| d < b.1) {
            best = Some((i, d));
        }
    }
    Ok(best.filter(|b| b.1 < attractors.epsilon).map(|b| b.0))
}

/// Visibility of each attractor from the point `(x, fiber)`: directions are
/// stratified uniform samples on the circle, one per arc of length `2 pi / n_dirs`.
#[allow(clippy::too_many_arguments)]
pub fn visibility(
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    attractors: &AttractorSet,
    x: Complex,
    fiber: &SpherePoint,
    n_dirs: usize,
    t: f64,
    dt: f64,
    seed: u64,
) -> Result<VisibilityEstimate> {
    if attractors.count() == 0 {
        return Err(Error::Precondition { field: "attractors", reason: "empty".into() });
    }
    if n_dirs == 0 {
        return Err(Error::Precondition { field: "N_dirs", reason: "at least one direction".into() });
    }
    if !(x.im > 0.0) {
        return Err(Error::NotInHalfPlane { im: x.im });
    }
    let grid: &GridSpec = attractors.representatives[0].grid();
    let labels = (0..n_dirs)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(seed, Purpose::Visibility, j as u64);
            let theta = std::f64::consts::TAU * (j as f64 + rng.random::<f64>()) / n_dirs as f64;
            let frame = Frame::from_point_angle(x, theta)?;
            let start = SkewState::new(group, rep, frame, *fiber)?;
            let m = birkhoff_empirical(group, rep, grid, &start, t, dt)?;
            label_measure(attractors, &m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tally(x, *fiber, attractors.count(), &labels))
}

/// Turns per-direction labels into a visibility estimate.
pub fn tally(x: Complex, fiber: SpherePoint, k: usize, labels: &[Option<usize>]) -> VisibilityEstimate {
    let mut counts = vec![0usize; k];
    let mut unlabeled = 0;
    for l in labels {
        match l {
            Some(i) => counts[*i] += 1,
            None => unlabeled += 1,
        }
    }
    let labeled: usize = counts.iter().sum();
    let f: Vec<f64> =
        counts.iter().map(|&c| if labeled > 0 { c as f64 / labeled as f64 } else { 0.0 }).collect();
    let half_widths = counts
        .iter()
        .map(|&c| {
            let (lo, hi) = wilson_interval(c, labeled);
            0.5 * (hi - lo)
        })
        .collect();
    VisibilityEstimate {
        point: x,
        fiber,
        directions: labels.len(),
        f,
        half_widths,
        counts,
        unlabeled,
        unlabeled_fraction: unlabeled as f64 / labels.len().max(1) as f64,
    }
}
