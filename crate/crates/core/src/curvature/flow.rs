use serde::{Deserialize, Serialize};

use crate::curvature::metric::ConformalMetric;
use crate::error::{Error, Result};
use crate::hyperbolic::wrap_angle;
use crate::Complex;

/// Fixed integration step.
pub const STEP: f64 = 1e-3;

/// A unit tangent vector of the perturbed metric with the Riccati variable
/// of its unstable direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicVCState {
    pub z: Complex,
    /// Euclidean angle of the direction.
    pub theta: f64,
    /// Growth rate of the unstable Jacobian.
    pub u: f64,
    /// Arclength in the perturbed metric.
    pub time: f64,
}

impl GeodesicVCState {
    pub fn new(z: Complex, theta: f64, u: f64) -> Result<Self> {
        if !(z.im > 0.0) {
            return Err(Error::NotInHalfPlane { im: z.im });
        }
        Ok(Self { z, theta: wrap_angle(theta), u, time: 0.0 })
    }

    pub fn reversed(&self) -> Self {
        Self { theta: wrap_angle(self.theta + std::f64::consts::PI), ..*self }
    }
}

/// `[x, y, theta, u, J]` with `J' = u`.
type Vars = [f64; 5];

fn rhs(metric: &ConformalMetric, v: &Vars) -> Result<Vars> {
    let g = metric.local(Complex::new(v[0], v[1]))?;
    let p = metric.pinch();
    let tol = 1e-9;
    if g.curvature > -p.kappa0 + tol || g.curvature < -p.kappa1 - tol {
        return Err(Error::Numerical(format!(
            "curvature {} outside the certified interval [{}, {}]",
            g.curvature, -p.kappa1, -p.kappa0
        )));
    }
    let e = (-g.phi).exp();
    let (s, c) = v[2].sin_cos();
    let y = v[1];
    Ok([y * e * c, y * e * s, e * (y * (g.phi_y * c - g.phi_x * s) - c), -v[3] * v[3] - g.curvature, v[3]])
}

#[inline]
fn axpy(a: &Vars, h: f64, k: &Vars) -> Vars {
    std::array::from_fn(|i| a[i] + h * k[i])
}

fn rk4(metric: &ConformalMetric, v: &Vars, dt: f64) -> Result<Vars> {
    let k1 = rhs(metric, v)?;
    let k2 = rhs(metric, &axpy(v, 0.5 * dt, &k1))?;
    let k3 = rhs(metric, &axpy(v, 0.5 * dt, &k2))?;
    let k4 = rhs(metric, &axpy(v, dt, &k3))?;
    Ok(std::array::from_fn(|i| v[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt <= STEP {
        Ok(())
    } else {
        Err(Error::Precondition { field: "dt", reason: format!("must lie in (0, {STEP}], got {dt}") })
    }
}

/// One classical Runge-Kutta step of the geodesic and Riccati equations,
/// without reduction to the domain.
pub fn geodesic_riccati_step(metric: &ConformalMetric, s: &GeodesicVCState, dt: f64) -> Result<GeodesicVCState> {
    check_step(dt)?;
    let v = rk4(metric, &[s.z.re, s.z.im, s.theta, s.u, 0.0], dt)?;
    Ok(GeodesicVCState { z: Complex::new(v[0], v[1]), theta: v[2], u: v[3], time: s.time + dt })
}

/// Integrates `n` steps, reducing to the domain whenever the point leaves
/// it. Returns the final state and `∫ u dt`.
pub(crate) fn integrate(metric: &ConformalMetric, s: &GeodesicVCState, dt: f64, n: u64) -> Result<(GeodesicVCState, f64)> {
    check_step(dt)?;
    let mut st = *s;
    let mut jac = 0.0;
    for _ in 0..n {
        let v = rk4(metric, &[st.z.re, st.z.im, st.theta, st.u, 0.0], dt)?;
        jac += v[4];
        st.z = Complex::new(v[0], v[1]);
        st.theta = wrap_angle(v[2]);
        st.u = v[3];
        st.time += dt;
        metric.reduce_with(&mut st.z, &mut st.theta, &mut [])?;
    }
    Ok((st, jac))
}

/// Integrates the leader `s` and carries `others` along with it, each
/// reduced by the isometry that reduces the leader.
pub(crate) fn integrate_together(
    metric: &ConformalMetric,
    s: &GeodesicVCState,
    others: &mut [GeodesicVCState],
    dt: f64,
    n: u64,
) -> Result<GeodesicVCState> {
    check_step(dt)?;
    let mut st = *s;
    let mut buf: Vec<(Complex, f64)> = Vec::with_capacity(others.len());
    for _ in 0..n {
        let v = rk4(metric, &[st.z.re, st.z.im, st.theta, st.u, 0.0], dt)?;
        st = GeodesicVCState { z: Complex::new(v[0], v[1]), theta: wrap_angle(v[2]), u: v[3], time: st.time + dt };
        buf.clear();
        for o in others.iter() {
            let w = rk4(metric, &[o.z.re, o.z.im, o.theta, o.u, 0.0], dt)?;
            buf.push((Complex::new(w[0], w[1]), wrap_angle(w[2])));
        }
        metric.reduce_with(&mut st.z, &mut st.theta, &mut buf)?;
        for (o, &(z, t)) in others.iter_mut().zip(&buf) {
            o.z = z;
            o.theta = t;
            o.time += dt;
        }
    }
    Ok(st)
}

/// The state `t` units in the past, direction restored.
pub(crate) fn flow_backward(metric: &ConformalMetric, s: &GeodesicVCState, t: f64) -> Result<GeodesicVCState> {
    let start = GeodesicVCState { u: metric.pinch().kappa0.sqrt(), ..s.reversed() };
    let (b, _) = integrate(metric, &start, STEP, steps(t))?;
    Ok(GeodesicVCState { time: s.time - t, u: s.u, ..b.reversed() })
}

pub(crate) fn steps(t: f64) -> u64 {
    (t / STEP).round() as u64
}

/// Curvature along the past of `s` at half-step spacing, oldest first,
/// ending at `s` itself.
fn past_curvatures(metric: &ConformalMetric, s: &GeodesicVCState, n_steps: u64) -> Result<Vec<f64>> {
    let half = 0.5 * STEP;
    let mut st = GeodesicVCState { u: metric.pinch().kappa0.sqrt(), ..s.reversed() };
    let mut out = Vec::with_capacity(2 * n_steps as usize + 1);
    out.push(metric.local(st.z)?.curvature);
    for _ in 0..2 * n_steps {
        let (next, _) = integrate(metric, &st, half, 1)?;
        st = next;
        out.push(metric.local(st.z)?.curvature);
    }
    out.reverse();
    Ok(out)
}

/// Riccati variable at `s` after integrating from `u_init` over the last
/// `washout` units of its past.
pub fn washed_out_u(metric: &ConformalMetric, s: &GeodesicVCState, washout: f64, u_init: f64) -> Result<f64> {
    let n = steps(washout);
    let ks = past_curvatures(metric, s, n)?;
    let f = |u: f64, k: f64| -u * u - k;
    let dt = STEP;
    let mut u = u_init;
    for i in 0..n as usize {
        let (k0, kh, k1) = (ks[2 * i], ks[2 * i + 1], ks[2 * i + 2]);
        let a = f(u, k0);
        let b = f(u + 0.5 * dt * a, kh);
        let c = f(u + 0.5 * dt * b, kh);
        let d = f(u + dt * c, k1);
        u += dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    }
    Ok(u)
}

/// `log Det D^u X_T` along an orbit segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianLog {
    pub value: f64,
    pub horizon: f64,
    pub washout: f64,
    pub steps: u64,
    /// Riccati variable at the start, after washout.
    pub u_start: f64,
    /// State at the end of the segment, `u` included.
    pub end: GeodesicVCState,
}

/// Smallest washout accepted for the current pinch.
pub fn min_washout(metric: &ConformalMetric) -> f64 {
    20.0 / metric.pinch().kappa0.sqrt()
}

/// Integrates `u` over `[0, T]` from `x`, after initializing `u` at `u_init`
/// a time `washout` in the past of `x`.
pub fn unstable_log_jacobian(
    metric: &ConformalMetric,
    x: &GeodesicVCState,
    t: f64,
    washout: f64,
    u_init: f64,
) -> Result<JacobianLog> {
    let need = min_washout(metric);
    if !(washout >= need) {
        return Err(Error::Precondition { field: "washout", reason: format!("must be at least {need:.3}, got {washout}") });
    }
    if !(t > 0.0) {
        return Err(Error::Precondition { field: "T", reason: format!("must be positive, got {t}") });
    }
    let u0 = washed_out_u(metric, x, washout, u_init)?;
    let n = steps(t);
    let (end, value) = integrate(metric, &GeodesicVCState { u: u0, ..*x }, STEP, n)?;
    Ok(JacobianLog { value, horizon: n as f64 * STEP, washout, steps: n, u_start: u0, end })
}

/// Continues a segment by `t` more units.
pub fn extend_log_jacobian(metric: &ConformalMetric, log: &JacobianLog, t: f64) -> Result<JacobianLog> {
    let n = steps(t);
    let (end, value) = integrate(metric, &log.end, STEP, n)?;
    Ok(JacobianLog {
        value: log.value + value,
        horizon: log.horizon + n as f64 * STEP,
        washout: log.washout,
        steps: log.steps + n,
        u_start: log.u_start,
        end,
    })
}
