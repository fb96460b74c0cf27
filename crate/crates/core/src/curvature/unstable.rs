use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::flow::{flow_backward, integrate, integrate_together, min_washout, steps, washed_out_u, GeodesicVCState, STEP};
use crate::curvature::metric::ConformalMetric;
use crate::error::{Error, Result};
use crate::hyperbolic::{hyperbolic_distance, Horocycle};
use crate::Frame;

/// Default time the pair generator looks into the past.
pub const DEFAULT_BACK_TIME: f64 = 20.0;

/// Two states on (approximately) one unstable leaf.
///
/// Both are flowed forward for `back_time` from a common past point `past`;
/// `y` starts from `past` moved by `offset` along the constant-curvature
/// unstable horocycle. Before `-back_time` the two pasts are taken to be the
/// past of `past`, so `offset` bounds how far they fail to coincide.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnstablePair {
    pub x: GeodesicVCState,
    pub y: GeodesicVCState,
    pub past: GeodesicVCState,
    pub offset: f64,
    pub back_time: f64,
    /// Distance between `x` and `y` in the perturbed metric.
    pub distance: f64,
}

pub(crate) fn displaced(s: &GeodesicVCState, eta: f64) -> Result<GeodesicVCState> {
    let f = Frame::from_point_angle(s.z, s.theta)?.horocycle_advance(eta, Horocycle::Unstable);
    Ok(GeodesicVCState { z: f.base_point(), theta: f.direction(), ..*s })
}

fn metric_distance(metric: &ConformalMetric, a: &GeodesicVCState, b: &GeodesicVCState) -> Result<f64> {
    let d = hyperbolic_distance(a.z, b.z)?;
    let pa = metric.local(a.z)?.phi;
    let pb = metric.local(b.z)?.phi;
    Ok((0.5 * (pa + pb)).exp() * d)
}

/// Pairs from `x` at the requested unstable distances, all sharing one past
/// point. The first state of every pair is the same.
pub fn unstable_family(
    metric: &ConformalMetric,
    x: &GeodesicVCState,
    distances: &[f64],
    back_time: f64,
) -> Result<Vec<UnstablePair>> {
    if !(back_time > 0.0) {
        return Err(Error::Precondition { field: "back_time", reason: format!("must be positive, got {back_time}") });
    }
    for &d in distances {
        if !(d > 0.0 && d <= 0.5) {
            return Err(Error::Precondition { field: "distance", reason: format!("must lie in (0, 0.5], got {d}") });
        }
    }
    let n = steps(back_time);
    let past = flow_backward(metric, x, back_time)?;
    let (xf, _) = integrate(metric, &past, STEP, n)?;
    distances
        .par_iter()
        .map(|&d| {
            let mut eta = d * (-back_time).exp();
            let mut last = None;
            for _ in 0..12 {
                let mut ys = [displaced(&past, eta)?];
                integrate_together(metric, &past, &mut ys, STEP, n)?;
                let got = metric_distance(metric, &xf, &ys[0])?;
                if !(got.is_finite() && got > 0.0) {
                    break;
                }
                last = Some((ys[0], got));
                if (got / d - 1.0).abs() < 1e-4 {
                    break;
                }
                eta *= d / got;
            }
            match last {
                Some((y, got)) if (got / d - 1.0).abs() < 1e-2 && eta > 1e-13 => Ok(UnstablePair {
                    x: xf,
                    y,
                    past,
                    offset: eta,
                    back_time: n as f64 * STEP,
                    distance: got,
                }),
                _ => Err(Error::Numerical(format!("unstable pair generator failed for distance {d}"))),
            }
        })
        .collect()
}

pub fn unstable_pair(metric: &ConformalMetric, x: &GeodesicVCState, distance: f64, back_time: f64) -> Result<UnstablePair> {
    Ok(unstable_family(metric, x, &[distance], back_time)?.remove(0))
}

/// `psi^u(x, y)` at horizon `T`, with the same quantity at `2T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    pub psi: f64,
    pub log_psi: f64,
    pub log_psi_double: f64,
    /// `|log psi(T) - log psi(2T)|`.
    pub defect: f64,
    pub horizon: f64,
    pub distance: f64,
}

pub const MIN_PSI_HORIZON: f64 = 50.0;

/// `log Det D^u X_{-T}(y) - log Det D^u X_{-T}(x)` for a generated pair:
/// the integral of `u_x - u_y` over `[-T, 0]`, with `u` washed out from
/// `-T - washout`.
fn log_psi(metric: &ConformalMetric, pair: &UnstablePair, t: f64) -> Result<f64> {
    let washout = min_washout(metric) + (t - pair.back_time).max(0.0);
    let u_past = washed_out_u(metric, &pair.past, washout, metric.pinch().kappa0.sqrt())?;
    let n = steps(pair.back_time);
    let start = GeodesicVCState { u: u_past, ..pair.past };
    let y0 = GeodesicVCState { u: u_past, ..displaced(&pair.past, pair.offset)? };
    let (_, jx) = integrate(metric, &start, STEP, n)?;
    let (_, jy) = integrate(metric, &y0, STEP, n)?;
    Ok(jx - jy)
}

pub fn psi_u(metric: &ConformalMetric, pair: &UnstablePair, t: f64) -> Result<PsiReport> {
    if !(t >= MIN_PSI_HORIZON) {
        return Err(Error::Precondition { field: "T", reason: format!("must be at least {MIN_PSI_HORIZON}, got {t}") });
    }
    if t < pair.back_time {
        return Err(Error::Precondition {
            field: "T",
            reason: format!("must cover the pair's back time {}", pair.back_time),
        });
    }
    let a = log_psi(metric, pair, t)?;
    let b = log_psi(metric, pair, 2.0 * t)?;
    Ok(PsiReport { psi: a.exp(), log_psi: a, log_psi_double: b, defect: (a - b).abs(), horizon: t, distance: pair.distance })
}

/// Empirical distortion constant over a set of pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub constant: f64,
    pub horizon: f64,
    pub distances: Vec<f64>,
    pub log_differences: Vec<f64>,
    pub max_defect: f64,
}

pub fn distortion_constant(metric: &ConformalMetric, pairs: &[UnstablePair], t: f64) -> Result<DistortionReport> {
    if pairs.is_empty() {
        return Err(Error::Precondition { field: "pairs", reason: "at least one pair is required".into() });
    }
    for p in pairs {
        if !(p.distance > 0.0 && p.distance <= 0.5) {
            return Err(Error::Precondition {
                field: "pairs",
                reason: format!("unstable distance must lie in (0, 0.5], got {}", p.distance),
            });
        }
    }
    let reports = pairs.par_iter().map(|p| psi_u(metric, p, t)).collect::<Result<Vec<_>>>()?;
    let constant = reports.iter().map(|r| r.log_psi.abs() / r.distance).fold(0.0, f64::max);
    Ok(DistortionReport {
        constant,
        horizon: t,
        distances: reports.iter().map(|r| r.distance).collect(),
        log_differences: reports.iter().map(|r| r.log_psi).collect(),
        max_defect: reports.iter().map(|r| r.defect).fold(0.0, f64::max),
    })
}
