//! Acceptance runs. Each test executes the shipped configs at full scale and
//! prints one `criterion N: PASS|FAIL` line to the real stdout, so the lines
//! show up even when libtest captures output.

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use foliate::cocycle::{initial_state, trajectory, Representation};
use foliate::surface::genus2;
use foliate_cli::{run, ExperimentConfig, Report};
use serde_json::Value;

fn load(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ExperimentConfig::from_json(&text).unwrap()
}

fn run_named(name: &str) -> Report {
    run(&load(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn verdict(n: u32, title: &str, pass: bool, detail: String) {
    let line = format!("criterion {n:>2}: {} {title}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} ({title}) failed: {detail}");
}

fn value(r: &Report, name: &str) -> f64 {
    r.estimate(name).unwrap_or_else(|| panic!("no estimate {name}")).value
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn criterion_01_fuchsian_exponent() {
    let r = run_named("fuchsian_exponent");
    let e = r.estimate("lambda").unwrap();
    let lo = e.value - e.ci95;
    let hi = e.value + e.ci95;
    let pass = lo >= -1.05 && hi <= -0.95;
    verdict(1, "Fuchsian exponent", pass, format!("lambda = {:.5} +- {:.5} (95% CI), target -1.00 +- 0.05", e.value, e.ci95));
}

#[test]
fn criterion_02_exponent_equality() {
    let r = run_named("brownian_equality");
    let b = r.estimate("lambda_brownian").unwrap();
    let g = r.estimate("lambda_geodesic").unwrap();
    let gap = (b.value - g.value).abs();
    let bound = b.ci95 + g.ci95;
    verdict(
        2,
        "Brownian and geodesic exponents agree",
        gap < bound,
        format!("brownian {:.5} +- {:.5}, geodesic {:.5} +- {:.5}, gap {gap:.5} < {bound:.5}", b.value, b.ci95, g.value, g.ci95),
    );
}

#[test]
fn criterion_03_unitary_null_case() {
    let r = run_named("unitary_exponent");
    let per_orbit = floats(&r.payload["exponent"]["per_orbit"]);
    let all_zero = per_orbit.iter().all(|&x| x == 0.0);

    // Step by step along a trajectory, for both unitary presets.
    let g = genus2().unwrap();
    let mut steps_zero = true;
    for rep in [Representation::unitary(&g).unwrap(), Representation::trivial(4)] {
        let rows = trajectory(&g, &rep, &initial_state(&g, 11, 0), 0.05, 4000).unwrap();
        steps_zero &= rows.iter().all(|row| row.log_deriv == 0.0);
    }
    let cmp = run_named("unitary_reversal");
    let tv = value(&cmp, "tv");
    verdict(
        3,
        "unitary exponent vanishes and mu+ = mu-",
        all_zero && steps_zero && tv < 0.05,
        format!("{} orbits all exactly 0: {all_zero}, per-step log derivative exactly 0: {steps_zero}, tv = {tv:.4} < 0.05", per_orbit.len()),
    );
}

#[test]
fn criterion_04_north_south_asymmetry() {
    let r = run_named("north_south");
    let tv = value(&r, "tv");
    let passing = value(&r, "passing_fraction");
    let cells = r.estimate("passing_fraction").unwrap().samples;
    verdict(
        4,
        "north-south asymmetry",
        tv > 0.9 && passing >= 0.95,
        format!("tv = {tv:.4} > 0.9, concentrated base cells {passing:.4} of {cells} >= 0.95"),
    );
}

fn gibbs_report() -> &'static Report {
    static REPORT: OnceLock<Report> = OnceLock::new();
    REPORT.get_or_init(|| run_named("gibbs_uniqueness"))
}

#[test]
fn criterion_05_gibbs_uniqueness() {
    let r = gibbs_report();
    let count = value(r, "attractor_count");
    let med = value(r, "median_pairwise_bl");
    let arc = value(r, "arc_bl");
    verdict(
        5,
        "one u-Gibbs state, Birkhoff convergence",
        count == 1.0 && med < 0.05 && arc < 0.05,
        format!("attractors = {count}, median pairwise BL = {med:.4} < 0.05, arc vs orbit BL = {arc:.4} < 0.05"),
    );
}

#[test]
fn criterion_06_invariance_defect() {
    let r = gibbs_report();
    let defects = floats(&r.payload["invariance_defects"]);
    let bound = 2.0 / 5000.0 + 0.01;
    let worst = defects.iter().copied().fold(0.0, f64::max);
    verdict(
        6,
        "invariance defect",
        defects.len() == 50 && defects.iter().all(|&d| d <= bound),
        format!("max over {} measures = {worst:.2e} <= {bound}", defects.len()),
    );
}

#[test]
fn criterion_07_visibility() {
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["visibility_fuchsian", "visibility_quasi_fuchsian"] {
        let r = run_named(name);
        let f = floats(&r.payload["f"]);
        let unlabeled = value(&r, "unlabeled_fraction");
        let gap = value(&r, "continuity_gap");
        pass &= f == [1.0] && unlabeled < 0.05 && gap < 0.05;
        details.push(format!("{name}: f = {f:?}, unlabeled {unlabeled:.3} < 0.05, |f(x) - f(y)| = {gap:.3} < 0.05"));
    }
    verdict(7, "visibility", pass, details.join("; "));
}

#[test]
fn criterion_08_psi_and_distortion() {
    let flat_psi = run_named("psi_flat");
    let dev = value(&flat_psi, "max_psi_deviation");
    let flat = run_named("distortion_flat");
    let logs: Vec<f64> = ["at_T", "at_2T"].iter().flat_map(|k| floats(&flat.payload[k]["log_differences"])).collect();
    let flat_zero = logs.iter().all(|&x| x == 0.0);
    let bumpy_psi = run_named("psi_bumpy");
    let defect = value(&bumpy_psi, "max_defect");
    let bumpy = run_named("distortion_bumpy");
    let (c1, c2) = (value(&bumpy, "constant_T"), value(&bumpy, "constant_2T"));
    let change = (c2 - c1).abs() / c1;
    let pinch = &bumpy.payload["metric"]["pinch"];
    verdict(
        8,
        "psi^u and distortion",
        dev <= 1e-6 && flat_zero && defect < 1e-4 && change <= 0.1 && c1 > 0.0,
        format!(
            "flat: |psi - 1| = {dev:.1e} <= 1e-6, {} log differences all 0: {flat_zero}; eps 0.05 (K in [{:.3}, {:.3}]): \
             Richardson defect {defect:.1e} < 1e-4, C(100) = {c1:.5}, C(200) = {c2:.5}, change {change:.2e} <= 0.1",
            logs.len(),
            pinch["k_min"].as_f64().unwrap(),
            pinch["k_max"].as_f64().unwrap(),
        ),
    );
}

#[test]
fn criterion_09_harmonic_identities() {
    let r = run_named("harmonic_identities");
    let mut pass = true;
    let mut details = Vec::new();
    for case in ["lebesgue", "point_mass"] {
        let coarse = value(&r, &format!("residual_{case}"));
        let fine = value(&r, &format!("residual_{case}_refined"));
        pass &= coarse < 1e-3 && fine < coarse;
        details.push(format!("{case}: {coarse:.2e} at 256^2, {fine:.2e} at 512^2"));
    }
    verdict(9, "Candel pairing identity", pass, details.join("; "));
}

#[test]
fn criterion_10_projection_density() {
    let r = run_named("projection_density");
    let marginal = floats(&r.payload["base_marginal"]);
    let empty = marginal.iter().filter(|&&m| m == 0.0).count();
    verdict(
        10,
        "projection density",
        marginal.len() == 32 * 32 && empty == 0,
        format!("{empty} empty cells of {} after T = 10^4", marginal.len()),
    );
}

#[test]
fn criterion_11_regular_set_shrinks() {
    let r = run_named("regular_set");
    let fractions: Vec<f64> = ["500", "1000", "2000"].iter().map(|t| value(&r, &format!("regular_fraction_T{t}"))).collect();
    let monotone = fractions.windows(2).all(|w| w[1] <= w[0]);
    let closest = r.payload["regular"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| floats(&x["distances"]).into_iter().fold(f64::INFINITY, f64::min))
        .collect::<Vec<_>>();
    verdict(
        11,
        "regular set shrinks",
        monotone,
        format!("fractions with BL < 0.1 at T = 500, 1000, 2000: {fractions:?}; smallest distances {closest:.3?}"),
    );
}

#[test]
fn criterion_12_infrastructure() {
    let mut identical = true;
    for name in ["fuchsian_exponent", "gibbs_uniqueness"] {
        let mut c = load(name);
        if name == "gibbs_uniqueness" {
            c.params.t = Some(500.0);
            c.params.n = Some(8);
            c.params.arc_samples = Some(4);
        }
        let mut payloads = Vec::new();
        for threads in [1, 4, 8, 1, 4, 8] {
            c.threads = Some(threads);
            payloads.push(run(&c).unwrap().payload_json());
        }
        identical &= payloads.iter().all(|p| p == &payloads[0]);
    }
    let g2 = run_named("verify_genus2");
    let torus = run_named("verify_punctured_torus");
    verdict(
        12,
        "reproducibility and group verification",
        identical && g2.pass && torus.pass,
        format!(
            "byte-identical payloads over threads 1/4/8 and reruns: {identical}; verify at 1e-8: genus2 {}, punctured torus {}",
            g2.pass, torus.pass
        ),
    );
}
