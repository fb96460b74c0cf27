use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{Frame, Mat2};
use crate::scalar::Real;
use crate::surface::domain::boundary_direction_in_disk;
use crate::surface::{FundamentalDomain, GeodesicLine, Letter, SideSpec, Vertex, Word};

/// How the defining relator is expected to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelatorKind {
    /// `±I` (closed surface).
    Identity,
    /// Trace `±2` (the boundary loop around a cusp).
    Parabolic,
}

/// Discrete group of isometries with a fundamental polygon.
#[derive(Clone, Debug)]
pub struct FuchsianGroup<T> {
    pub name: String,
    generators: Vec<Mat2<T>>,
    domain: FundamentalDomain<T>,
    relator: Word,
    relator_kind: RelatorKind,
}

/// Outcome of [`FuchsianGroup::verify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub tolerance: f64,
    pub generator_traces: Vec<f64>,
    pub relator_residual: f64,
    pub side_pairing_residual: f64,
    pub area: f64,
    pub expected_area: f64,
    pub area_defect: f64,
    pub euler_characteristic: i64,
    pub vertex_cycles: usize,
    pub cusps: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl<T: Real> FuchsianGroup<T> {
    /// Assembles a group from explicit sides. Nothing is verified here.
    pub fn from_sides(
        name: impl Into<String>,
        generators: Vec<Mat2<T>>,
        sides: &[SideSpec<T>],
        base: Complex<T>,
        relator: Word,
        relator_kind: RelatorKind,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::GroupInvalid("no generators".into()));
        }
        relator.check_indices(generators.len())?;
        let domain = FundamentalDomain::from_sides(sides, base, &generators)?;
        Ok(Self { name: name.into(), generators, domain, relator, relator_kind })
    }

    /// Dirichlet polygon at `base` cut out by the bisectors towards the images
    /// of `base` under the generators and their inverses.
    pub fn dirichlet(
        name: impl Into<String>,
        generators: Vec<Mat2<T>>,
        base: Complex<T>,
        relator: Word,
        relator_kind: RelatorKind,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::GroupInvalid("no generators".into()));
        }
        let p_inv = Frame::from_point_angle(base, T::FRAC_PI_2())?.matrix().sl_inverse();
        let mut cand: Vec<(T, SideSpec<T>)> = Vec::new();
        for k in 0..generators.len() {
            for inverse in [false, true] {
                let letter = Letter::new(k as u16, inverse);
                let m = letter.matrix(&generators);
                let img = m.apply(base);
                let line = GeodesicLine::bisector(base, img)?;
                let (e0, e1) = line.endpoints();
                let w = crate::hyperbolic::to_disk(p_inv.apply(img));
                let angle = crate::hyperbolic::wrap_angle(w.im.atan2(w.re));
                cand.push((angle, SideSpec { endpoints: [e0, e1], letter }));
            }
        }
        cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let sides: Vec<SideSpec<T>> = cand.into_iter().map(|(_, s)| s).collect();
        Self::from_sides(name, generators, &sides, base, relator, relator_kind)
    }

    pub fn generators(&self) -> &[Mat2<T>] {
        &self.generators
    }

    pub fn domain(&self) -> &FundamentalDomain<T> {
        &self.domain
    }

    pub fn relator(&self) -> &Word {
        &self.relator
    }

    pub fn relator_kind(&self) -> RelatorKind {
        self.relator_kind
    }

    /// Involution on side indices.
    pub fn pairing(&self) -> Vec<usize> {
        self.domain.sides().iter().map(|s| s.partner).collect()
    }

    pub fn side_specs(&self) -> Vec<SideSpec<T>> {
        self.domain.sides().iter().map(|s| SideSpec { endpoints: s.endpoints, letter: s.letter }).collect()
    }

    pub fn reduce(&self, g: &Frame<T>) -> Result<(Frame<T>, Word)> {
        self.domain.reduce(g)
    }

    pub fn with_generators_replaced(&self, generators: Vec<Mat2<T>>) -> Result<Self> {
        if generators.len() != self.generators.len() {
            return Err(Error::GroupInvalid("generator count changed".into()));
        }
        Self::from_sides(
            self.name.clone(),
            generators,
            &self.side_specs(),
            self.domain.base_point(),
            self.relator.clone(),
            self.relator_kind,
        )
    }

    /// Checks hyperbolicity of the generators, the relator, the side pairing
    /// and Gauss-Bonnet for the polygon.
    pub fn verify(&self, tol: f64) -> GroupReport {
        let mut failures = Vec::new();
        let traces: Vec<f64> = self.generators.iter().map(|g| g.trace().to_f64_lossy()).collect();
        for (k, t) in traces.iter().enumerate() {
            if !(t.abs() > 2.0 + tol) {
                failures.push(format!("generator {k} is not hyperbolic (trace {t})"));
            }
        }
        for (k, g) in self.generators.iter().enumerate() {
            let dev = (g.det() - T::one()).abs().to_f64_lossy();
            if !(dev < tol) {
                failures.push(format!("generator {k} has |det - 1| = {dev:e}"));
            }
        }
        let rel = self.relator.evaluate(&self.generators);
        let relator_residual = match self.relator_kind {
            RelatorKind::Identity => rel.distance_to_pm_identity().to_f64_lossy(),
            RelatorKind::Parabolic => (rel.trace().abs() - T::lit(2.0)).abs().to_f64_lossy(),
        };
        if !(relator_residual < tol) {
            failures.push(format!("relator residual {relator_residual:e}"));
        }

        let sides = self.domain.sides();
        let n = sides.len();
        let mut side_pairing_residual = 0.0f64;
        for (p, side) in sides.iter().enumerate() {
            let s = side.partner;
            let t = &side.transform;
            let a = sides[s].start.apply(t).mismatch(&side.end).to_f64_lossy();
            let b = sides[s].end.apply(t).mismatch(&side.start).to_f64_lossy();
            let e0 = t.apply_boundary(sides[s].endpoints[0]);
            let e1 = t.apply_boundary(sides[s].endpoints[1]);
            let [f0, f1] = side.endpoints;
            let e = (e0.distance(&f0).max(e1.distance(&f1)))
                .min(e0.distance(&f1).max(e1.distance(&f0)))
                .to_f64_lossy();
            let r = a.max(b).max(e);
            if !(r < tol) {
                failures.push(format!("side {p} is not the image of side {s} (residual {r:e})"));
            }
            side_pairing_residual = side_pairing_residual.max(r);
        }

        let angles: Vec<f64> = (0..n).map(|k| interior_angle(&self.domain, k).to_f64_lossy()).collect();
        let area = (n as f64 - 2.0) * std::f64::consts::PI - angles.iter().sum::<f64>();

        let mut uf: Vec<usize> = (0..n).collect();
        for (k, side) in sides.iter().enumerate() {
            let p = side.partner;
            union(&mut uf, k, (p + 1) % n);
            union(&mut uf, (k + 1) % n, p);
        }
        let mut finite_roots = Vec::new();
        let mut ideal_roots = Vec::new();
        for (k, side) in sides.iter().enumerate() {
            let r = find(&mut uf, k);
            let list = if side.start.is_ideal() { &mut ideal_roots } else { &mut finite_roots };
            if !list.contains(&r) {
                list.push(r);
            }
        }
        let chi = finite_roots.len() as i64 - (n as i64) / 2 + 1;
        let expected_area = 2.0 * std::f64::consts::PI * (chi.abs() as f64);
        let area_defect = (area - expected_area).abs();
        if !(area_defect < tol.max(1e-6)) {
            failures.push(format!("area {area} differs from 2 pi |chi| = {expected_area}"));
        }
        for k in 0..n {
            let root = find(&mut uf, k);
            if finite_roots.contains(&root) {
                let sum: f64 = (0..n).filter(|&j| find(&mut uf, j) == root).map(|j| angles[j]).sum();
                if !((sum - std::f64::consts::TAU).abs() < tol.max(1e-9)) {
                    failures.push(format!("vertex cycle of vertex {k} has angle sum {sum}"));
                    break;
                }
            }
        }
        GroupReport {
            tolerance: tol,
            generator_traces: traces,
            relator_residual,
            side_pairing_residual,
            area,
            expected_area,
            area_defect,
            euler_characteristic: chi,
            vertex_cycles: finite_roots.len(),
            cusps: ideal_roots.len(),
            pass: failures.is_empty(),
            failures,
        }
    }
}

fn find(uf: &mut [usize], mut k: usize) -> usize {
    while uf[k] != k {
        uf[k] = uf[uf[k]];
        k = uf[k];
    }
    k
}

fn union(uf: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(uf, a), find(uf, b));
    if ra != rb {
        uf[ra.max(rb)] = ra.min(rb);
    }
}

/// Interior angle at vertex `k` (between sides `k-1` and `k`); zero if ideal.
fn interior_angle<T: Real>(d: &FundamentalDomain<T>, k: usize) -> T {
    let sides = d.sides();
    let n = sides.len();
    let v = match sides[k].start {
        Vertex::Finite(z) => z,
        Vertex::Ideal(_) => return T::zero(),
    };
    let prev = &sides[(k + n - 1) % n];
    let here = &sides[k];
    let frame = match Frame::from_point_angle(v, T::FRAC_PI_2()) {
        Ok(f) => f,
        Err(_) => return T::nan(),
    };
    let inv = frame.matrix().sl_inverse();
    let dir = |target: &Vertex<T>| -> T {
        let w = match target {
            Vertex::Finite(z) => crate::hyperbolic::to_disk(inv.apply(*z)),
            Vertex::Ideal(p) => boundary_direction_in_disk(inv.apply_boundary(*p)),
        };
        w.im.atan2(w.re)
    };
    let a = dir(&prev.start);
    let b = dir(&here.end);
    crate::hyperbolic::wrap_signed(a - b).abs()
}
