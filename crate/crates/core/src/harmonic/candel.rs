use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::poisson::{check_grid, kernel, kernel_gradient, node, DiskField};
use crate::Complex;

/// A positive harmonic function on the disk, given by its boundary measure
/// against `dξ/2π`: a uniform part plus point masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeasure {
    pub uniform: f64,
    /// `(weight, angle)` pairs.
    pub atoms: Vec<(f64, f64)>,
}

impl BoundaryMeasure {
    /// `h = 1`.
    pub fn lebesgue() -> Self {
        Self { uniform: 1.0, atoms: Vec::new() }
    }

    /// `h = k(., xi)`.
    pub fn point_mass(xi: f64) -> Self {
        Self { uniform: 0.0, atoms: vec![(1.0, xi)] }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.uniform >= 0.0
            && self.uniform.is_finite()
            && self.atoms.iter().all(|&(w, a)| w > 0.0 && w.is_finite() && a.is_finite());
        if !ok || (self.uniform == 0.0 && self.atoms.is_empty()) {
            return Err(Error::Precondition {
                field: "h",
                reason: "boundary measure needs nonnegative finite weights and positive total mass".into(),
            });
        }
        Ok(())
    }

    /// The harmonic extension, in closed form.
    pub fn value(&self, x: Complex) -> f64 {
        self.uniform + self.atoms.iter().map(|&(w, a)| w * kernel(x, a)).sum::<f64>()
    }
}

/// `log u` for the test function `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogDensity {
    Constant { c: f64 },
    /// `log u(x) = a Re x + b Im x`.
    Linear { a: f64, b: f64 },
}

impl LogDensity {
    pub fn gradient(&self, _x: Complex) -> [f64; 2] {
        match *self {
            LogDensity::Constant { .. } => [0.0, 0.0],
            LogDensity::Linear { a, b } => [a, b],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureParams {
    /// Grid side `N`.
    pub grid: usize,
    /// Boundary trapezoid nodes, also the number of Fourier modes kept on
    /// the other side.
    pub boundary_nodes: usize,
    pub margin: f64,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self { grid: 256, boundary_nodes: 1024, margin: 0.02 }
    }
}

impl QuadratureParams {
    pub fn doubled(&self) -> Self {
        Self { grid: 2 * self.grid, boundary_nodes: 2 * self.boundary_nodes, margin: self.margin }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub grid: usize,
    pub boundary_nodes: usize,
}

/// Compares the two sides of the plaque-level pairing identity on the masked
/// disk:
///
/// * `lhs = ∫_{S¹} ∫_D <∇ log k(x,ξ), ∇ log u> k(x,ξ) dx dm_h(ξ)`, with the
///   uniform part of `m_h` integrated by the trapezoid rule on
///   `boundary_nodes` angles and atoms taken exactly;
/// * `rhs = ∫_D <∇ log h, ∇ log u> h dx`, with `∇h` taken from the Fourier
///   series of `m_h` truncated after `boundary_nodes` modes.
///
/// Both area integrals use the same midpoint rule, so the residual
/// `|lhs - rhs| / (1 + |rhs|)` measures the two boundary discretizations.
pub fn candel_identity_residual(h: &BoundaryMeasure, u: &LogDensity, q: &QuadratureParams) -> Result<IdentityReport> {
    check_grid(q.grid, q.margin)?;
    h.validate()?;
    if q.boundary_nodes < 8 {
        return Err(Error::Precondition { field: "boundary_nodes", reason: format!("at least 8, got {}", q.boundary_nodes) });
    }
    let field = DiskField::sample(q.grid, q.margin, |x| h.value(x))?;
    let min = field.min_masked();
    if !(min > 0.0) {
        return Err(Error::Precondition { field: "h", reason: format!("not positive on the mask (min {min})") });
    }

    let n = q.grid;
    let m = q.boundary_nodes;
    let area = field.spacing() * field.spacing();
    let nodes: Vec<f64> = (0..m).map(|j| std::f64::consts::TAU * j as f64 / m as f64).collect();
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (mut l, mut r) = (0.0, 0.0);
            for j in 0..n {
                if !field.mask()[i * n + j] {
                    continue;
                }
                let x = node(n, i, j);
                let g = u.gradient(x);
                let mut dk = [0.0; 2];
                if h.uniform > 0.0 {
                    for &xi in &nodes {
                        let d = kernel_gradient(x, xi);
                        dk[0] += d[0];
                        dk[1] += d[1];
                    }
                    dk[0] *= h.uniform / m as f64;
                    dk[1] *= h.uniform / m as f64;
                }
                for &(w, xi) in &h.atoms {
                    let d = kernel_gradient(x, xi);
                    dk[0] += w * d[0];
                    dk[1] += w * d[1];
                }
                l += dk[0] * g[0] + dk[1] * g[1];
                let dh = truncated_gradient(h, x, m);
                r += dh[0] * g[0] + dh[1] * g[1];
            }
            (l * area, r * area)
        })
        .collect();
    let (lhs, rhs) = rows.iter().fold((0.0, 0.0), |(a, b), &(l, r)| (a + l, b + r));
    Ok(IdentityReport { lhs, rhs, residual: (lhs - rhs).abs() / (1.0 + rhs.abs()), grid: n, boundary_nodes: m })
}

/// Gradient of `Re f` with `f = uniform + Σ w (1 + 2 Σ_{n=1}^{K} (x e^{-iξ})^n)`.
fn truncated_gradient(h: &BoundaryMeasure, x: Complex, modes: usize) -> [f64; 2] {
    let mut fp = Complex::new(0.0, 0.0);
    for &(w, xi) in &h.atoms {
        let conj = Complex::from_polar(1.0, -xi);
        let q = x * conj;
        // Σ n q^{n-1} by Horner.
        let mut s = Complex::new(0.0, 0.0);
        for k in (1..=modes).rev() {
            s = s * q + k as f64;
        }
        fp += 2.0 * w * conj * s;
    }
    // f' = h_x - i h_y.
    [fp.re, -fp.im]
}

/// Residuals at `q` and at the doubled resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub coarse: IdentityReport,
    pub fine: IdentityReport,
}

impl Refinement {
    /// Whether refinement lowered the residual. A residual already at
    /// rounding level (`<= 1e-12`) counts as converged.
    pub fn improved(&self) -> bool {
        self.fine.residual < self.coarse.residual || self.fine.residual <= 1e-12
    }
}

pub fn candel_refinement(h: &BoundaryMeasure, u: &LogDensity, q: &QuadratureParams) -> Result<Refinement> {
    Ok(Refinement { coarse: candel_identity_residual(h, u, q)?, fine: candel_identity_residual(h, u, &q.doubled())? })
}
