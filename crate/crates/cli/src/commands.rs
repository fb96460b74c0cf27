use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use foliate::cocycle::{initial_state, steps_for, transverse_lyapunov, ExponentEstimate, Representation, MIN_HORIZON};
use foliate::curvature::{
    distortion_constant, psi_u, random_direction_state, unstable_family, ConformalMetric, GeodesicVCState, MetricSpec,
    UnstablePair, MAX_EPSILON, MAX_WORD_RADIUS, MIN_PSI_HORIZON, MIN_WORD_RADIUS, STEP,
};
use foliate::gibbs::cells::MAX_FIBER_LEVEL;
use foliate::gibbs::{
    bl_distance, classify_attractors, compare_time_reversal, ensemble_empirical, fiber_heatmap_svg, invariance_defect,
    orbit_measures, pairwise_bl, regular_fraction, section_concentration, unstable_arc_empirical, visibility,
    EmpiricalMeasure, Endpoint, GridSpec, Recording,
};
use foliate::harmonic::{
    brownian_lyapunov, candel_refinement, BoundaryMeasure, BrownianConfig, LogDensity, QuadratureParams,
    MAX_BROWNIAN_DT, MIN_DISK_GRID,
};
use foliate::rng::{stream, Purpose};
use foliate::stats::median;
use foliate::surface::{FuchsianGroup, GroupJson};
use foliate::{Complex, Frame, SpherePoint};

use crate::config::{Command, ExperimentConfig, Thresholds};
use crate::error::CliError;
use crate::report::{Check, Estimate, Relation, Report};

/// Position cells over which fiber concentration is assessed.
const CONCENTRATION_GRID: [u32; 2] = [8, 16];

/// Largest time step of the geodesic-flow ensembles.
const MAX_GEODESIC_DT: f64 = 1.0;

/// Parameters with the command's defaults filled in and every value checked.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub t: f64,
    pub dt: f64,
    pub n: usize,
    pub shift: f64,
    pub cluster_epsilon: f64,
    pub arc_length: f64,
    pub arc_samples: usize,
    pub directions: usize,
    pub point: Option<Complex>,
    pub fiber: SpherePoint,
    pub probe_distance: Option<f64>,
    pub fiber_level: u32,
    pub cell_threshold: f64,
    pub generator_scale: f64,
    pub quadrature: QuadratureParams,
    pub point_mass_angle: f64,
    pub epsilon: f64,
    pub word_radius: usize,
    pub distances: Vec<f64>,
    pub back_time: f64,
    pub tolerance: f64,
    pub base_grid: Option<[u32; 2]>,
    pub horizons: Vec<f64>,
    pub regular_threshold: f64,
}

/// `(T, dt, N)` defaults per command.
fn ensemble_defaults(c: Command) -> (f64, f64, usize) {
    match c {
        Command::Exponent => (2000.0, 0.05, 100),
        Command::BrownianExponent => (1000.0, 1e-3, 200),
        Command::Gibbs => (5000.0, 0.05, 50),
        Command::Visibility => (2000.0, 0.05, 16),
        Command::ComparePm => (2000.0, 0.05, 100),
        Command::Distortion | Command::PsiU => (100.0, STEP, 4),
        Command::HarmonicCheck | Command::VerifyGroup => (0.0, 0.0, 0),
    }
}

fn bad(field: &str, reason: impl Into<String>) -> CliError {
    CliError::precondition(field, reason)
}

fn require(cond: bool, field: &str, reason: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(bad(field, reason()))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    require(v.is_finite() && v > 0.0, field, || format!("must be positive and finite, got {v}"))?;
    Ok(v)
}

impl Settings {
    /// Fills in defaults and checks every parameter the command will use.
    pub fn resolve(config: &ExperimentConfig) -> Result<Self, CliError> {
        let c = config.command;
        let p = &config.params;
        let (t0, dt0, n0) = ensemble_defaults(c);
        let ensemble = !matches!(c, Command::HarmonicCheck | Command::VerifyGroup);
        let curvature = matches!(c, Command::Distortion | Command::PsiU);

        let t = p.t.unwrap_or(t0);
        let dt = p.dt.unwrap_or(dt0);
        let n = p.n.unwrap_or(n0);
        if ensemble {
            positive("params.T", t)?;
            positive("params.dt", dt)?;
            require(n >= 1, "params.N", || "must be at least 1".into())?;
            if curvature {
                require(t >= MIN_PSI_HORIZON, "params.T", || format!("must be at least {MIN_PSI_HORIZON}, got {t}"))?;
                require(dt == STEP, "params.dt", || format!("is fixed at {STEP} for variable curvature, got {dt}"))?;
            } else {
                require(t >= MIN_HORIZON, "params.T", || format!("must be at least {MIN_HORIZON}, got {t}"))?;
                let max_dt = if c == Command::BrownianExponent { MAX_BROWNIAN_DT } else { MAX_GEODESIC_DT };
                require(dt <= max_dt, "params.dt", || format!("must be at most {max_dt}, got {dt}"))?;
                require(steps_for(t, dt) >= 1, "params.dt", || format!("must not exceed T = {t}"))?;
            }
        }
        if c == Command::Gibbs {
            require(n >= 2, "params.N", || "at least two orbits are needed for pairwise distances".into())?;
        }

        let shift = p.shift.unwrap_or(1.0);
        require(c != Command::Gibbs || (shift > 0.0 && shift <= t / 10.0), "params.shift", || {
            format!("must lie in (0, T/10] = (0, {}], got {shift}", t / 10.0)
        })?;
        let cluster_epsilon = positive("params.cluster_epsilon", p.cluster_epsilon.unwrap_or(0.1))?;
        let arc_length = positive("params.arc_length", p.arc_length.unwrap_or(1.0))?;
        let arc_samples = p.arc_samples.unwrap_or(16);
        require(arc_samples >= 1, "params.arc_samples", || "must be at least 1".into())?;
        let directions = p.directions.unwrap_or(256);
        require(directions >= 1, "params.directions", || "must be at least 1".into())?;

        let point = match p.point {
            Some([re, im]) => {
                require(re.is_finite() && im.is_finite() && im > 0.0, "params.point", || {
                    format!("must lie in the upper half-plane, got [{re}, {im}]")
                })?;
                Some(Complex::new(re, im))
            }
            None => None,
        };
        let fiber = match p.fiber {
            Some([re, im]) => {
                require(re.is_finite() && im.is_finite(), "params.fiber", || "must be finite".into())?;
                SpherePoint::from_affine(Complex::new(re, im))
            }
            None => SpherePoint::from_affine(Complex::new(0.0, 0.0)),
        };
        let probe_distance = p.probe_distance.map(|d| positive("params.probe_distance", d)).transpose()?;

        let fiber_level = p.fiber_level.unwrap_or(4);
        require((1..=MAX_FIBER_LEVEL).contains(&fiber_level), "params.fiber_level", || {
            format!("must lie in 1..={MAX_FIBER_LEVEL}, got {fiber_level}")
        })?;
        let cell_threshold = p.cell_threshold.unwrap_or(0.9);
        require(cell_threshold > 0.0 && cell_threshold <= 1.0, "params.cell_threshold", || {
            format!("must lie in (0, 1], got {cell_threshold}")
        })?;
        let generator_scale = p.generator_scale.unwrap_or(1.0);
        require(generator_scale.is_finite() && generator_scale >= 0.0, "params.generator_scale", || {
            format!("must be non-negative, got {generator_scale}")
        })?;

        let dq = QuadratureParams::default();
        let quadrature = QuadratureParams {
            grid: p.grid.unwrap_or(dq.grid),
            boundary_nodes: p.boundary_nodes.unwrap_or(dq.boundary_nodes),
            margin: p.margin.unwrap_or(dq.margin),
        };
        require(quadrature.grid >= MIN_DISK_GRID, "params.grid", || {
            format!("must be at least {MIN_DISK_GRID}, got {}", quadrature.grid)
        })?;
        require(quadrature.boundary_nodes >= 8, "params.boundary_nodes", || {
            format!("must be at least 8, got {}", quadrature.boundary_nodes)
        })?;
        require(quadrature.margin > 0.0 && quadrature.margin < 1.0, "params.margin", || {
            format!("must lie in (0, 1), got {}", quadrature.margin)
        })?;
        let point_mass_angle = p.point_mass_angle.unwrap_or(PI / 3.0);
        require(point_mass_angle.is_finite(), "params.point_mass_angle", || "must be finite".into())?;

        let epsilon = p.epsilon.unwrap_or(0.05);
        require((0.0..=MAX_EPSILON).contains(&epsilon), "params.epsilon", || {
            format!("must lie in [0, {MAX_EPSILON}], got {epsilon}")
        })?;
        let word_radius = p.word_radius.unwrap_or(3);
        require((MIN_WORD_RADIUS..=MAX_WORD_RADIUS).contains(&word_radius), "params.word_radius", || {
            format!("must lie in {MIN_WORD_RADIUS}..={MAX_WORD_RADIUS}, got {word_radius}")
        })?;
        let default_distances = if c == Command::PsiU { vec![0.1] } else { vec![0.05, 0.1, 0.2, 0.4] };
        let distances = p.distances.clone().unwrap_or(default_distances);
        require(!distances.is_empty(), "params.distances", || "must not be empty".into())?;
        for &d in &distances {
            require(d > 0.0 && d <= 0.5, "params.distances", || format!("each must lie in (0, 0.5], got {d}"))?;
        }
        let back_time = positive("params.back_time", p.back_time.unwrap_or(foliate::curvature::DEFAULT_BACK_TIME))?;
        if curvature {
            require(t >= back_time, "params.T", || format!("must be at least back_time = {back_time}, got {t}"))?;
        }
        let tolerance = positive("params.tolerance", p.tolerance.unwrap_or(1e-8))?;

        if let Some([r, a]) = p.base_grid {
            require(r >= 1 && a >= 1, "params.base_grid", || "both counts must be at least 1".into())?;
        }
        let horizons = p.horizons.clone().unwrap_or_default();
        for &h in &horizons {
            require(h.is_finite() && h >= MIN_HORIZON, "params.horizons", || {
                format!("each must be at least {MIN_HORIZON}, got {h}")
            })?;
        }
        let regular_threshold = positive("params.regular_threshold", p.regular_threshold.unwrap_or(0.1))?;

        check_thresholds(&config.thresholds)?;

        Ok(Self {
            t,
            dt,
            n,
            shift,
            cluster_epsilon,
            arc_length,
            arc_samples,
            directions,
            point,
            fiber,
            probe_distance,
            fiber_level,
            cell_threshold,
            generator_scale,
            quadrature,
            point_mass_angle,
            epsilon,
            word_radius,
            distances,
            back_time,
            tolerance,
            base_grid: p.base_grid,
            horizons,
            regular_threshold,
        })
    }

    fn steps(&self) -> u64 {
        steps_for(self.t, self.dt)
    }
}

fn check_thresholds(th: &Thresholds) -> Result<(), CliError> {
    let fields = [
        ("thresholds.expected_mean", th.expected_mean),
        ("thresholds.mean_tolerance", th.mean_tolerance),
        ("thresholds.max_median_bl", th.max_median_bl),
        ("thresholds.max_arc_bl", th.max_arc_bl),
        ("thresholds.defect_slack", th.defect_slack),
        ("thresholds.max_unlabeled_fraction", th.max_unlabeled_fraction),
        ("thresholds.max_continuity_gap", th.max_continuity_gap),
        ("thresholds.min_tv", th.min_tv),
        ("thresholds.max_tv", th.max_tv),
        ("thresholds.min_passing_fraction", th.min_passing_fraction),
        ("thresholds.max_residual", th.max_residual),
        ("thresholds.max_defect", th.max_defect),
        ("thresholds.max_relative_change", th.max_relative_change),
        ("thresholds.max_psi_deviation", th.max_psi_deviation),
        ("thresholds.max_log_difference", th.max_log_difference),
    ];
    for (name, v) in fields {
        if let Some(v) = v {
            require(v.is_finite(), name, || format!("must be finite, got {v}"))?;
            if name != "thresholds.expected_mean" {
                require(v >= 0.0, name, || format!("must be non-negative, got {v}"))?;
            }
        }
    }
    Ok(())
}

/// Worker count: the config, then the `THREADS` environment variable, then
/// rayon's default.
fn worker_count(config: &ExperimentConfig) -> Result<usize, CliError> {
    if let Some(n) = config.threads {
        return Ok(n);
    }
    match std::env::var("THREADS") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Schema(format!("THREADS must be a worker count, got {s:?}"))),
        Err(_) => Ok(0),
    }
}

/// Validates `config` in full, then runs its command on a dedicated worker pool.
pub fn run(config: &ExperimentConfig) -> Result<Report, CliError> {
    let settings = Settings::resolve(config)?;
    let group = config.group()?;
    let rep = config.representation(&group)?;
    let threads = worker_count(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Schema(format!("threads: {e}")))?;
    let start = Instant::now();
    let mut report = Report::new(config);
    pool.install(|| dispatch(config, &settings, &group, &rep, &mut report))?;
    report.wall_clock = start.elapsed();
    Ok(report)
}

fn dispatch(
    config: &ExperimentConfig,
    s: &Settings,
    group: &FuchsianGroup<f64>,
    rep: &Representation,
    r: &mut Report,
) -> Result<(), CliError> {
    match config.command {
        Command::Exponent => exponent(config, s, group, rep, r),
        Command::BrownianExponent => brownian_exponent(config, s, group, rep, r),
        Command::Gibbs => gibbs(config, s, group, rep, r),
        Command::Visibility => visibility_cmd(config, s, group, rep, r),
        Command::ComparePm => compare_pm(config, s, group, rep, r),
        Command::HarmonicCheck => harmonic_check(config, s, r),
        Command::Distortion => distortion(config, s, group, r),
        Command::PsiU => psi_u_cmd(config, s, group, r),
        Command::VerifyGroup => verify_group(s, group, rep, r),
    }
}

/// The whole 95% interval must lie within `tolerance` of the expected mean.
fn mean_check(th: &Thresholds, name: &str, est: &ExponentEstimate, r: &mut Report) {
    if let Some(expected) = th.expected_mean {
        let tol = th.mean_tolerance.unwrap_or(0.0);
        r.push_check(Check::new(name, (est.mean - expected).abs() + est.ci95(), Relation::AtMost, tol));
    }
}

fn exponent(c: &ExperimentConfig, s: &Settings, g: &FuchsianGroup<f64>, rep: &Representation, r: &mut Report) -> Result<(), CliError> {
    let est = transverse_lyapunov(g, rep, c.seed, s.t, s.dt, s.n)?;
    r.steps = est.steps_per_orbit * s.n as u64;
    r.estimates.push(Estimate::new("lambda", est.mean, est.ci95(), s.n as u64));
    mean_check(&c.thresholds, "lambda_within_tolerance", &est, r);
    r.payload = json!({ "exponent": est });
    Ok(())
}

fn brownian_exponent(
    c: &ExperimentConfig,
    s: &Settings,
    g: &FuchsianGroup<f64>,
    rep: &Representation,
    r: &mut Report,
) -> Result<(), CliError> {
    let cfg = BrownianConfig { generator_scale: s.generator_scale };
    let brown = brownian_lyapunov(g, rep, c.seed, s.t, s.dt, s.n, &cfg)?;
    let geo = transverse_lyapunov(g, rep, c.seed, s.t, s.dt, s.n)?;
    r.steps = (brown.steps_per_orbit + geo.steps_per_orbit) * s.n as u64;
    let gap = (brown.mean - geo.mean).abs();
    let ci_sum = brown.ci95() + geo.ci95();
    r.estimates.push(Estimate::new("lambda_brownian", brown.mean, brown.ci95(), s.n as u64));
    r.estimates.push(Estimate::new("lambda_geodesic", geo.mean, geo.ci95(), s.n as u64));
    r.estimates.push(Estimate::new("gap", gap, ci_sum, s.n as u64));
    r.push_check(Check::new("gap_within_ci", gap, Relation::AtMost, ci_sum));
    mean_check(&c.thresholds, "lambda_brownian_within_tolerance", &brown, r);
    r.payload = json!({ "brownian": brown, "geodesic": geo, "generator_scale": s.generator_scale });
    Ok(())
}

fn pairwise_summary(ms: &[EmpiricalMeasure]) -> Result<(Vec<f64>, f64, f64), CliError> {
    let d: Vec<f64> = pairwise_bl(ms)?.into_iter().map(|p| p.2).collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    let med = median(&d);
    Ok((d, med, max))
}

fn gibbs(c: &ExperimentConfig, s: &Settings, g: &FuchsianGroup<f64>, rep: &Representation, r: &mut Report) -> Result<(), CliError> {
    let th = &c.thresholds;
    let grid = GridSpec::bl_default();
    let ms = orbit_measures(g, rep, &grid, c.seed, s.t, s.dt, s.n, Recording::Forward)?;
    let (d, med, max) = pairwise_summary(&ms)?;
    let set = classify_attractors(&ms, s.cluster_epsilon)?;
    let defects = ms.par_iter().map(|m| invariance_defect(g, rep, m, s.shift)).collect::<Result<Vec<_>, _>>()?;
    let max_defect = defects.iter().copied().fold(0.0, f64::max);
    let mix = EmpiricalMeasure::uniform_mixture(&ms)?;
    let s0 = initial_state(g, c.seed, 0);
    let arc = unstable_arc_empirical(g, rep, &grid, &s0.frame, &s0.fiber, s.arc_length, s.arc_samples, s.t, s.dt)?;
    let arc_bl = bl_distance(&arc, &mix)?;
    r.steps = s.steps() * (s.n + s.arc_samples) as u64;

    r.estimates.push(Estimate::exact("attractor_count", set.count() as f64));
    r.estimates.push(Estimate::new("median_pairwise_bl", med, 0.0, d.len() as u64));
    r.estimates.push(Estimate::new("max_pairwise_bl", max, 0.0, d.len() as u64));
    r.estimates.push(Estimate::new("arc_bl", arc_bl, 0.0, s.arc_samples as u64));
    r.estimates.push(Estimate::new("max_invariance_defect", max_defect, 0.0, s.n as u64));
    if let Some(k) = th.attractor_count {
        r.push_check(Check::new("attractor_count", set.count() as f64, Relation::Equal, k as f64));
    }
    if let Some(b) = th.max_median_bl {
        r.push_check(Check::new("median_pairwise_bl", med, Relation::Below, b));
    }
    if let Some(b) = th.max_arc_bl {
        r.push_check(Check::new("arc_bl", arc_bl, Relation::Below, b));
    }
    if let Some(slack) = th.defect_slack {
        r.push_check(Check::new("invariance_defect", max_defect, Relation::AtMost, 2.0 / s.t + slack));
    }

    let mut payload = json!({
        "attractor_count": set.count(),
        "labels": set.labels,
        "pairwise_bl": d,
        "invariance_defects": defects,
        "arc_bl": arc_bl,
        "mixture": mix.to_json(),
    });
    if let Some([radial, angular]) = s.base_grid {
        let bg = GridSpec::base_only(radial, angular)?;
        let m = ensemble_empirical(g, rep, &bg, c.seed, s.t, s.dt, s.n, Recording::Forward)?;
        let marginal = m.base_marginal();
        let empty = marginal.iter().filter(|&&x| x == 0.0).count();
        r.steps += s.steps() * s.n as u64;
        r.estimates.push(Estimate::new("empty_base_cells", empty as f64, 0.0, m.samples()));
        if let Some(k) = th.max_empty_cells {
            r.push_check(Check::new("empty_base_cells", empty as f64, Relation::AtMost, k as f64));
        }
        payload["base_marginal"] = json!(marginal);
    }
    r.payload = payload;
    r.figure = Some(fiber_heatmap_svg(&mix, &format!("fiber marginal, {} orbits, T = {}", s.n, s.t)));
    Ok(())
}

fn visibility_cmd(
    c: &ExperimentConfig,
    s: &Settings,
    g: &FuchsianGroup<f64>,
    rep: &Representation,
    r: &mut Report,
) -> Result<(), CliError> {
    let th = &c.thresholds;
    let grid = GridSpec::bl_default();
    let probes = orbit_measures(g, rep, &grid, c.seed, s.t, s.dt, s.n, Recording::Forward)?;
    let set = classify_attractors(&probes, s.cluster_epsilon)?;
    let x = s.point.unwrap_or_else(|| g.domain().base_point());
    let v = visibility(g, rep, &set, x, &s.fiber, s.directions, s.t, s.dt, c.seed)?;
    r.steps = s.steps() * (s.n + s.directions) as u64;

    r.estimates.push(Estimate::exact("attractor_count", set.count() as f64));
    for (i, (&f, &hw)) in v.f.iter().zip(&v.half_widths).enumerate() {
        r.estimates.push(Estimate::new(&format!("f_{}", i + 1), f, hw, s.directions as u64));
    }
    r.estimates.push(Estimate::new("unlabeled_fraction", v.unlabeled_fraction, 0.0, s.directions as u64));
    if let Some(k) = th.attractor_count {
        r.push_check(Check::new("attractor_count", set.count() as f64, Relation::Equal, k as f64));
    }
    if let Some(b) = th.max_unlabeled_fraction {
        r.push_check(Check::new("unlabeled_fraction", v.unlabeled_fraction, Relation::Below, b));
    }

    let mut payload = json!({
        "attractor_count": set.count(),
        "f": v.f,
        "visibility": v,
        "min_separation": if set.min_separation.is_finite() { json!(set.min_separation) } else { Value::Null },
    });
    if let Some(dist) = s.probe_distance {
        let y = Frame::from_point_angle(x, 0.0)?.geodesic_advance(dist).base_point();
        let w = visibility(g, rep, &set, y, &s.fiber, s.directions, s.t, s.dt, c.seed)?;
        r.steps += s.steps() * s.directions as u64;
        let gap = v.f.iter().zip(&w.f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.estimates.push(Estimate::new("continuity_gap", gap, 0.0, s.directions as u64));
        if let Some(b) = th.max_continuity_gap {
            r.push_check(Check::new("continuity_gap", gap, Relation::Below, b));
        }
        payload["probe"] = json!(w);
        payload["continuity_gap"] = json!(gap);
    }
    r.payload = payload;
    Ok(())
}

fn compare_pm(c: &ExperimentConfig, s: &Settings, g: &FuchsianGroup<f64>, rep: &Representation, r: &mut Report) -> Result<(), CliError> {
    let th = &c.thresholds;
    let grid = GridSpec::comparison_default();
    let cmp = compare_time_reversal(g, rep, &grid, c.seed, s.t, s.dt, s.n)?;
    let [radial, angular] = s.base_grid.unwrap_or(CONCENTRATION_GRID);
    let base = GridSpec::base_only(radial, angular)?;
    let conc =
        section_concentration(g, rep, &base, c.seed, s.t, s.dt, s.n, Endpoint::Backward, s.fiber_level, s.cell_threshold)?;
    r.steps = 3 * s.steps() * s.n as u64;

    r.estimates.push(Estimate::new("tv", cmp.tv, 0.0, s.n as u64));
    r.estimates.push(Estimate::new("passing_fraction", conc.passing_fraction, 0.0, conc.visited_cells as u64));
    r.estimates.push(Estimate::new("hit_fraction", conc.hit_fraction, 0.0, s.steps() * s.n as u64));
    if let Some(b) = th.min_tv {
        r.push_check(Check::new("tv_min", cmp.tv, Relation::Above, b));
    }
    if let Some(b) = th.max_tv {
        r.push_check(Check::new("tv_max", cmp.tv, Relation::Below, b));
    }
    if let Some(b) = th.min_passing_fraction {
        r.push_check(Check::new("passing_fraction", conc.passing_fraction, Relation::AtLeast, b));
    }

    let bl_grid = GridSpec::bl_default();
    let mut regular = Vec::with_capacity(s.horizons.len());
    for &h in &s.horizons {
        let f = regular_fraction(g, rep, &bl_grid, c.seed, h, s.dt, s.n, s.regular_threshold)?;
        r.steps += 2 * steps_for(h, s.dt) * s.n as u64;
        r.estimates.push(Estimate::new(&format!("regular_fraction_T{h}"), f.fraction, 0.0, s.n as u64));
        regular.push(f);
    }
    if regular.len() >= 2 {
        let rise = regular.windows(2).map(|w| w[1].fraction - w[0].fraction).fold(f64::NEG_INFINITY, f64::max);
        r.push_check(Check::new("regular_fraction_nonincreasing", rise, Relation::AtMost, 0.0));
    }

    r.payload = json!({
        "tv": cmp.tv,
        "plus_fiber_marginal": cmp.plus.fiber_marginal(),
        "minus_fiber_marginal": cmp.minus.fiber_marginal(),
        "concentration": conc,
        "regular": regular,
    });
    r.figure = Some(fiber_heatmap_svg(&cmp.plus, &format!("forward fiber marginal, {} orbits, T = {}", s.n, s.t)));
    Ok(())
}

fn harmonic_check(c: &ExperimentConfig, s: &Settings, r: &mut Report) -> Result<(), CliError> {
    let u = LogDensity::Linear { a: 1.0, b: 0.0 };
    let cases = [("lebesgue", BoundaryMeasure::lebesgue()), ("point_mass", BoundaryMeasure::point_mass(s.point_mass_angle))];
    let mut payload = serde_json::Map::new();
    for (name, h) in cases {
        let ref_ = candel_refinement(&h, &u, &s.quadrature)?;
        r.steps += (ref_.coarse.grid * ref_.coarse.grid + ref_.fine.grid * ref_.fine.grid) as u64;
        r.estimates.push(Estimate::exact(&format!("residual_{name}"), ref_.coarse.residual));
        r.estimates.push(Estimate::exact(&format!("residual_{name}_refined"), ref_.fine.residual));
        r.push_check(Check::new(&format!("{name}_refines"), ref_.fine.residual, Relation::Below, ref_.coarse.residual));
        if let Some(b) = c.thresholds.max_residual {
            r.push_check(Check::new(&format!("residual_{name}"), ref_.coarse.residual, Relation::Below, b));
        }
        payload.insert(name.into(), json!({ "boundary": h, "log_density": u, "refinement": ref_ }));
    }
    r.payload = Value::Object(payload);
    Ok(())
}

fn metric_for(s: &Settings, g: &FuchsianGroup<f64>) -> Result<ConformalMetric, CliError> {
    Ok(MetricSpec::new(s.epsilon, s.word_radius).build(g)?)
}

/// `N` random starts with the requested unstable partners each.
fn pairs_for(c: &ExperimentConfig, s: &Settings, metric: &ConformalMetric) -> Result<Vec<UnstablePair>, CliError> {
    let mut pairs = Vec::with_capacity(s.n * s.distances.len());
    for i in 0..s.n as u64 {
        let (z, theta) = random_direction_state(metric, &mut stream(c.seed, Purpose::VariableCurvature, i));
        let x = GeodesicVCState::new(z, theta, metric.pinch().kappa0.sqrt())?;
        pairs.extend(unstable_family(metric, &x, &s.distances, s.back_time)?);
    }
    Ok(pairs)
}

fn metric_payload(metric: &ConformalMetric) -> Value {
    json!({ "spec": metric.spec(), "pinch": metric.pinch(), "invariance_residual": metric.invariance_residual() })
}

fn distortion(c: &ExperimentConfig, s: &Settings, g: &FuchsianGroup<f64>, r: &mut Report) -> Result<(), CliError> {
    let th = &c.thresholds;
    let metric = metric_for(s, g)?;
    let pairs = pairs_for(c, s, &metric)?;
    let at_t = distortion_constant(&metric, &pairs, s.t)?;
    let at_2t = distortion_constant(&metric, &pairs, 2.0 * s.t)?;
    let change = if at_t.constant == 0.0 && at_2t.constant == 0.0 {
        0.0
    } else {
        (at_2t.constant - at_t.constant).abs() / at_t.constant.abs().max(f64::MIN_POSITIVE)
    };
    let max_log = at_t.log_differences.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let max_defect = at_t.max_defect.max(at_2t.max_defect);
    let per_pair = steps_for(s.back_time, STEP) + 3 * steps_for(s.t, STEP);
    r.steps = per_pair * pairs.len() as u64 * 2;

    let np = pairs.len() as u64;
    r.estimates.push(Estimate::new("constant_T", at_t.constant, 0.0, np));
    r.estimates.push(Estimate::new("constant_2T", at_2t.constant, 0.0, np));
    r.estimates.push(Estimate::new("relative_change", change, 0.0, np));
    r.estimates.push(Estimate::new("max_log_difference", max_log, 0.0, np));
    r.estimates.push(Estimate::new("max_defect", max_defect, 0.0, np));
    if let Some(b) = th.max_relative_change {
        r.push_check(Check::new("relative_change", change, Relation::AtMost, b));
    }
    if let Some(b) = th.max_log_difference {
        r.push_check(Check::new("max_log_difference", max_log, Relation::AtMost, b));
    }
    if let Some(b) = th.max_defect {
        r.push_check(Check::new("max_defect", max_defect, Relation::Below, b));
    }
    r.payload = json!({ "metric": metric_payload(&metric), "at_T": at_t, "at_2T": at_2t, "pairs": pairs });
    Ok(())
}

fn psi_u_cmd(c: &ExperimentConfig, s: &Settings, g: &FuchsianGroup<f64>, r: &mut Report) -> Result<(), CliError> {
    let th = &c.thresholds;
    let metric = metric_for(s, g)?;
    let pairs = pairs_for(c, s, &metric)?;
    let reports = pairs.par_iter().map(|p| psi_u(&metric, p, s.t)).collect::<Result<Vec<_>, _>>()?;
    let deviation = reports.iter().map(|p| (p.psi - 1.0).abs()).fold(0.0, f64::max);
    let max_defect = reports.iter().map(|p| p.defect).fold(0.0, f64::max);
    let per_pair = steps_for(s.back_time, STEP) + 3 * steps_for(s.t, STEP);
    r.steps = per_pair * pairs.len() as u64;

    let np = pairs.len() as u64;
    r.estimates.push(Estimate::new("max_psi_deviation", deviation, 0.0, np));
    r.estimates.push(Estimate::new("max_defect", max_defect, 0.0, np));
    if let Some(b) = th.max_psi_deviation {
        r.push_check(Check::new("psi_deviation", deviation, Relation::AtMost, b));
    }
    if let Some(b) = th.max_defect {
        r.push_check(Check::new("max_defect", max_defect, Relation::Below, b));
    }
    r.payload = json!({ "metric": metric_payload(&metric), "reports": reports });
    Ok(())
}

fn verify_group(s: &Settings, g: &FuchsianGroup<f64>, rep: &Representation, r: &mut Report) -> Result<(), CliError> {
    let report = g.verify(s.tolerance);
    let rep_residual = rep.relator_residual(g);
    r.steps = 1;
    r.estimates.push(Estimate::exact("relator_residual", report.relator_residual));
    r.estimates.push(Estimate::exact("side_pairing_residual", report.side_pairing_residual));
    r.estimates.push(Estimate::exact("area_defect", report.area_defect));
    r.estimates.push(Estimate::exact("representation_relator_residual", rep_residual));
    r.push_check(Check::new("group_verified", if report.pass { 1.0 } else { 0.0 }, Relation::Equal, 1.0));
    r.payload = json!({ "group": GroupJson::from_group(g), "verification": report });
    Ok(())
}
