use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::wrap_angle;
use crate::rng::{stream, Purpose};
use crate::surface::{FuchsianGroup, Letter};
use crate::{Complex, Frame, Mat2};

pub const MAX_EPSILON: f64 = 0.1;
pub const MIN_WORD_RADIUS: usize = 2;
pub const MAX_WORD_RADIUS: usize = 8;

/// Hyperbolic support radius of the bump.
pub const SUPPORT_RADIUS: f64 = 2.0;

/// Probe points used for the invariance residual.
pub const INVARIANCE_PROBES: usize = 100;

/// Serialized description of a perturbed metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub epsilon: f64,
    pub word_radius: usize,
    pub bump: BumpSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub support_radius: f64,
    /// Only `"quintic"`: `(1 - s/S)^5` in `s = cosh d - 1`.
    pub profile: String,
}

impl MetricSpec {
    pub fn new(epsilon: f64, word_radius: usize) -> Self {
        Self { epsilon, word_radius, bump: BumpSpec { support_radius: SUPPORT_RADIUS, profile: "quintic".into() } }
    }

    pub fn build(&self, group: &FuchsianGroup<f64>) -> Result<ConformalMetric> {
        if self.bump.profile != "quintic" {
            return Err(Error::Precondition { field: "bump.profile", reason: format!("unknown profile {:?}", self.bump.profile) });
        }
        if self.bump.support_radius != SUPPORT_RADIUS {
            return Err(Error::Precondition {
                field: "bump.support_radius",
                reason: format!("only {SUPPORT_RADIUS} is supported, got {}", self.bump.support_radius),
            });
        }
        build_invariant_bump(group, self.epsilon, self.word_radius)
    }
}

/// Curvature bounds `-kappa1 <= K <= -kappa0` certified on a grid over the
/// domain, widened by a margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pinch {
    pub kappa0: f64,
    pub kappa1: f64,
    /// Extremes of `K` seen on the grid.
    pub k_min: f64,
    pub k_max: f64,
    pub grid_points: usize,
}

impl Pinch {
    /// Invariant interval of the Riccati flow.
    pub fn riccati_interval(&self) -> (f64, f64) {
        (self.kappa0.sqrt(), self.kappa1.sqrt())
    }

    fn constant(k: f64) -> Self {
        Self { kappa0: -k, kappa1: -k, k_min: k, k_max: k, grid_points: 0 }
    }
}

/// Local geometry of the metric `e^{2 phi}` times the hyperbolic metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalGeometry {
    pub phi: f64,
    /// Euclidean partial derivatives of `phi`.
    pub phi_x: f64,
    pub phi_y: f64,
    pub curvature: f64,
}

/// The conformal factor is `phi = epsilon * Σ bump(d(z, p))` over the distinct
/// orbit points `p = w z0` of the base point under words of length at most
/// `word_radius`.
#[derive(Clone, Debug)]
pub struct ConformalMetric {
    group: FuchsianGroup<f64>,
    spec: MetricSpec,
    /// All collected centres within `keep_radius` of the base point.
    centers: Vec<Complex>,
    /// Centres that can reach the neighbourhood of the domain used while stepping.
    local: Vec<Complex>,
    base: Complex,
    local_radius: f64,
    pinch: Pinch,
    invariance_residual: f64,
    curvature_override: Option<f64>,
}

#[inline]
fn cosh_minus_one(a: Complex, b: Complex) -> f64 {
    (a - b).norm_sqr() / (2.0 * a.im * b.im)
}

fn support_s() -> f64 {
    SUPPORT_RADIUS.cosh() - 1.0
}

/// Builds the perturbed metric and certifies its curvature pinch.
pub fn build_invariant_bump(group: &FuchsianGroup<f64>, epsilon: f64, word_radius: usize) -> Result<ConformalMetric> {
    if !(0.0..=MAX_EPSILON).contains(&epsilon) {
        return Err(Error::Precondition { field: "epsilon", reason: format!("must lie in [0, {MAX_EPSILON}], got {epsilon}") });
    }
    if !(MIN_WORD_RADIUS..=MAX_WORD_RADIUS).contains(&word_radius) {
        return Err(Error::Precondition {
            field: "word_radius",
            reason: format!("must lie in [{MIN_WORD_RADIUS}, {MAX_WORD_RADIUS}], got {word_radius}"),
        });
    }
    let domain = group.domain();
    if domain.has_ideal_vertices() {
        return Err(Error::Precondition { field: "group", reason: "needs a compact fundamental domain".into() });
    }
    let base = domain.base_point();
    let r = domain.circumradius();
    let keep_radius = 3.0 * r + SUPPORT_RADIUS;
    let local_radius = r + 1.0;
    let centers = orbit_points(group, word_radius, keep_radius);
    let reach = (local_radius + SUPPORT_RADIUS).cosh() - 1.0;
    let local = centers.iter().copied().filter(|&p| cosh_minus_one(p, base) < reach).collect();
    let mut metric = ConformalMetric {
        group: group.clone(),
        spec: MetricSpec::new(epsilon, word_radius),
        centers,
        local,
        base,
        local_radius,
        pinch: Pinch::constant(-1.0),
        invariance_residual: 0.0,
        curvature_override: None,
    };
    metric.pinch = metric.certify_pinch()?;
    metric.invariance_residual = metric.measure_invariance(INVARIANCE_PROBES);
    Ok(metric)
}

/// Distinct points `w z0`, `|w| <= k`, within `keep` of `z0`.
fn orbit_points(group: &FuchsianGroup<f64>, k: usize, keep: f64) -> Vec<Complex> {
    let domain = group.domain();
    let z0 = domain.base_point();
    let gens = group.generators();
    let letters: Vec<Letter> =
        (0..gens.len() as u16).flat_map(|g| [Letter::new(g, false), Letter::new(g, true)]).collect();
    let keep_cm1 = keep.cosh() - 1.0;
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    let mut push = |m: &Mat2, points: &mut Vec<Complex>| {
        let p = m.apply(z0);
        if cosh_minus_one(p, z0) > keep_cm1 {
            return;
        }
        let w = domain.to_base_disk(p);
        let key = ((w.re * 1e8).round() as i64, (w.im * 1e8).round() as i64);
        if seen.insert(key) {
            points.push(p);
        }
    };
    push(&Mat2::identity(), &mut points);
    let mut frontier: Vec<(Mat2, Letter)> = Vec::new();
    for &l in &letters {
        let m = l.matrix(gens);
        push(&m, &mut points);
        frontier.push((m, l));
    }
    for _ in 1..k {
        let mut next = Vec::with_capacity(frontier.len() * (letters.len() - 1));
        for (m, last) in &frontier {
            for &l in &letters {
                if l == last.inv() {
                    continue;
                }
                let w = *m * l.matrix(gens);
                push(&w, &mut points);
                next.push((w, l));
            }
        }
        frontier = next;
    }
    points
}

impl ConformalMetric {
    /// Same metric with the curvature replaced by the constant `k < 0` in the
    /// Riccati equation only; positions still follow `phi`. Isolates the
    /// Riccati dynamics in tests.
    pub fn with_curvature_override(mut self, k: f64) -> Result<Self> {
        if !(k < 0.0) {
            return Err(Error::Precondition { field: "curvature", reason: format!("must be negative, got {k}") });
        }
        self.curvature_override = Some(k);
        self.pinch = Pinch::constant(k);
        Ok(self)
    }

    pub fn group(&self) -> &FuchsianGroup<f64> {
        &self.group
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon
    }

    pub fn pinch(&self) -> Pinch {
        self.pinch
    }

    /// Largest `|phi(g z) - phi(z)|` over probe points of the domain and
    /// generator letters `g`, for the truncated sum.
    pub fn invariance_residual(&self) -> f64 {
        self.invariance_residual
    }

    pub fn center_count(&self) -> usize {
        self.centers.len()
    }

    /// `phi` by direct summation over every collected centre.
    pub fn phi_direct(&self, z: Complex) -> f64 {
        self.spec.epsilon * sum_bumps(&self.centers, z).0
    }

    /// Geometry near the domain. Points farther than the stepping
    /// neighbourhood are rejected since the local centre list may not cover
    /// them; the unperturbed metric is defined everywhere.
    pub fn local(&self, z: Complex) -> Result<LocalGeometry> {
        if !(z.im > 0.0) {
            return Err(Error::NotInHalfPlane { im: z.im });
        }
        let eps = self.spec.epsilon;
        if eps != 0.0 && cosh_minus_one(z, self.base) > self.local_radius.cosh() - 1.0 {
            return Err(Error::Precondition { field: "z", reason: "outside the neighbourhood of the domain".into() });
        }
        let (f, fx, fy, lap) = if eps == 0.0 { (0.0, 0.0, 0.0, 0.0) } else { sum_bumps(&self.local, z) };
        let phi = eps * f;
        let curvature = match self.curvature_override {
            Some(k) => k,
            None => (-2.0 * phi).exp() * (-1.0 - eps * lap),
        };
        Ok(LocalGeometry { phi, phi_x: eps * fx, phi_y: eps * fy, curvature })
    }

    /// Reduces a point into the domain and returns its geometry.
    pub fn geometry(&self, z: Complex) -> Result<LocalGeometry> {
        let (w, _) = self.group.domain().reduce_point(z)?;
        self.local(w)
    }

    fn certify_pinch(&self) -> Result<Pinch> {
        let domain = self.group.domain();
        let (nr, na) = (160usize, 320usize);
        let rmax = (0.5 * domain.circumradius()).tanh();
        let rows: Vec<(f64, f64, usize)> = (0..nr)
            .into_par_iter()
            .map(|i| {
                let rho = rmax * (i as f64 + 0.5) / nr as f64;
                let mut acc = (f64::INFINITY, f64::NEG_INFINITY, 0);
                for j in 0..na {
                    let a = std::f64::consts::TAU * j as f64 / na as f64;
                    let z = domain.from_base_disk(Complex::from_polar(rho, a));
                    if !domain.contains(z) {
                        continue;
                    }
                    if let Ok(g) = self.local(z) {
                        acc = (acc.0.min(g.curvature), acc.1.max(g.curvature), acc.2 + 1);
                    }
                }
                acc
            })
            .collect();
        let (k_min, k_max, n) =
            rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0), |a, r| (a.0.min(r.0), a.1.max(r.1), a.2 + r.2));
        let margin = 0.05 * (k_max - k_min);
        let pinch = Pinch { kappa0: -k_max - margin, kappa1: -k_min + margin, k_min, k_max, grid_points: n };
        if !(pinch.kappa0 > 0.0) || !pinch.kappa1.is_finite() {
            return Err(Error::Precondition {
                field: "epsilon",
                reason: format!("curvature pinch fails: K in [{k_min}, {k_max}] on the grid"),
            });
        }
        Ok(pinch)
    }

    fn measure_invariance(&self, probes: usize) -> f64 {
        if self.spec.epsilon == 0.0 {
            return 0.0;
        }
        let domain = self.group.domain();
        let gens = self.group.generators();
        let mut rng = stream(0, Purpose::Probe, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let z = domain.sample_uniform(&mut rng);
            let f = self.phi_direct(z);
            for g in 0..gens.len() as u16 {
                for inv in [false, true] {
                    let w = Letter::new(g, inv).matrix(gens).apply(z);
                    worst = worst.max((self.phi_direct(w) - f).abs());
                }
            }
        }
        worst
    }

    /// Probe points for external invariance checks.
    pub fn probe_points(&self, n: usize, seed: u64) -> Vec<Complex> {
        let mut rng = stream(seed, Purpose::Probe, 1);
        (0..n).map(|_| self.group.domain().sample_uniform(&mut rng)).collect()
    }

    /// Reduces `(z, theta)` into the domain if it has left it, applying the
    /// same isometry to `others`.
    pub(crate) fn reduce_with(&self, z: &mut Complex, theta: &mut f64, others: &mut [(Complex, f64)]) -> Result<()> {
        let domain = self.group.domain();
        if domain.contains(*z) {
            return Ok(());
        }
        let frame = Frame::from_point_angle(*z, *theta)?;
        let mut m = Mat2::identity();
        let r = domain.reduce_frame_with(&frame, |k| m = domain.sides()[k].inverse * m)?;
        *z = r.base_point();
        *theta = r.direction();
        for (w, t) in others.iter_mut() {
            let f = Frame::from_point_angle(*w, *t)?.left_mul(&m);
            *w = f.base_point();
            *t = f.direction();
        }
        Ok(())
    }
}

/// `(Σ f, Σ df/dx, Σ df/dy, Σ Δ_hyp f)` for the quintic bump about each centre.
#[inline]
fn sum_bumps(centers: &[Complex], z: Complex) -> (f64, f64, f64, f64) {
    let big_s = support_s();
    let (mut f, mut fx, mut fy, mut lap) = (0.0, 0.0, 0.0, 0.0);
    for &p in centers {
        let yy = z.im * p.im;
        let d = z - p;
        let s = d.norm_sqr() / (2.0 * yy);
        if s >= big_s {
            continue;
        }
        let t = 1.0 - s / big_s;
        let t2 = t * t;
        let v = t2 * t2 * t;
        let d1 = -5.0 / big_s * t2 * t2;
        let d2 = 20.0 / (big_s * big_s) * t2 * t;
        let sx = d.re / yy;
        let sy = d.im / yy - s / z.im;
        f += v;
        fx += d1 * sx;
        fy += d1 * sy;
        lap += s * (s + 2.0) * d2 + 2.0 * (1.0 + s) * d1;
    }
    (f, fx, fy, lap)
}

/// Uniform random state in the domain, direction uniform.
pub fn random_direction_state<R: Rng + ?Sized>(metric: &ConformalMetric, rng: &mut R) -> (Complex, f64) {
    let z = metric.group().domain().sample_uniform(rng);
    (z, wrap_angle(rng.random::<f64>() * std::f64::consts::TAU))
}
