use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex;

/// Smallest accepted disk grid.
pub const MIN_DISK_GRID: usize = 64;

/// Poisson kernel of the unit disk, normalized against `dξ/2π`:
/// `(1 - |x|^2) / |x - e^{iξ}|^2`.
pub fn poisson_kernel(x: Complex, xi: f64) -> Result<f64> {
    let r2 = x.norm_sqr();
    if !(r2 < 1.0) {
        return Err(Error::Precondition { field: "x", reason: format!("must lie in the open unit disk, |x| = {}", r2.sqrt()) });
    }
    Ok(kernel(x, xi))
}

#[inline]
pub(crate) fn kernel(x: Complex, xi: f64) -> f64 {
    let e = Complex::from_polar(1.0, xi);
    (1.0 - x.norm_sqr()) / (x - e).norm_sqr()
}

/// Euclidean gradient of the Poisson kernel in `x`, as `(d/dx, d/dy)`.
#[inline]
pub(crate) fn kernel_gradient(x: Complex, xi: f64) -> [f64; 2] {
    let e = Complex::from_polar(1.0, xi);
    let d = x - e;
    let q = d.norm_sqr();
    let num = 1.0 - x.norm_sqr();
    let a = -2.0 / q;
    let b = -2.0 * num / (q * q);
    [a * x.re + b * d.re, a * x.im + b * d.im]
}

/// Values on the cell centres of an `N x N` grid over `[-1, 1]^2`, with a
/// mask selecting the nodes inside `|x| < 1 - margin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskField {
    n: usize,
    margin: f64,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl DiskField {
    /// Samples `f` on the masked nodes; the rest hold `NaN`.
    pub fn sample(n: usize, margin: f64, f: impl Fn(Complex) -> f64 + Sync) -> Result<Self> {
        check_grid(n, margin)?;
        let rows: Vec<(Vec<f64>, Vec<bool>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut vals = Vec::with_capacity(n);
                let mut mask = Vec::with_capacity(n);
                for j in 0..n {
                    let x = node(n, i, j);
                    let inside = x.norm() < 1.0 - margin;
                    mask.push(inside);
                    vals.push(if inside { f(x) } else { f64::NAN });
                }
                (vals, mask)
            })
            .collect();
        let mut values = Vec::with_capacity(n * n);
        let mut mask = Vec::with_capacity(n * n);
        for (v, m) in rows {
            values.extend(v);
            mask.extend(m);
        }
        let field = Self { n, margin, values, mask };
        if let Some(k) = field.masked().find(|&k| !field.values[k].is_finite()) {
            return Err(Error::Numerical(format!("non-finite value at node {:?}", field.point(k))));
        }
        Ok(field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn spacing(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Node position of flat index `k` (row-major, row = y).
    pub fn point(&self, k: usize) -> Complex {
        node(self.n, k / self.n, k % self.n)
    }

    pub fn masked(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(k, _)| k)
    }

    pub fn min_masked(&self) -> f64 {
        self.masked().map(|k| self.values[k]).fold(f64::INFINITY, f64::min)
    }

    /// Largest five-point Laplacian over masked nodes whose four neighbours
    /// are also masked.
    pub fn max_laplacian(&self) -> f64 {
        let n = self.n;
        let h2 = self.spacing() * self.spacing();
        let mut worst: f64 = 0.0;
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let k = i * n + j;
                let nb = [k - 1, k + 1, k - n, k + n];
                if !self.mask[k] || nb.iter().any(|&m| !self.mask[m]) {
                    continue;
                }
                let lap = (nb.iter().map(|&m| self.values[m]).sum::<f64>() - 4.0 * self.values[k]) / h2;
                worst = worst.max(lap.abs());
            }
        }
        worst
    }
}

pub(crate) fn check_grid(n: usize, margin: f64) -> Result<()> {
    if n < MIN_DISK_GRID {
        return Err(Error::Precondition { field: "grid", reason: format!("at least {MIN_DISK_GRID}, got {n}") });
    }
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::Precondition { field: "margin", reason: format!("must lie in (0, 1), got {margin}") });
    }
    Ok(())
}

#[inline]
pub(crate) fn node(n: usize, i: usize, j: usize) -> Complex {
    let h = 2.0 / n as f64;
    Complex::new(-1.0 + h * (j as f64 + 0.5), -1.0 + h * (i as f64 + 0.5))
}
