use std::fs;
use std::path::Path;
use std::process::Command as Process;

use foliate::gibbs::{fiber_heatmap_svg, EmpiricalMeasure, GridSpec};
use foliate_cli::{
    apply_override, emit, load_config, render_csv, run, Cli, CliError, Command, ExperimentConfig, Format, Params,
    Report, Thresholds,
};
use serde_json::{json, Value};

fn config(v: Value) -> ExperimentConfig {
    ExperimentConfig::from_value(v).unwrap()
}

fn short_exponent(seed: u64) -> ExperimentConfig {
    config(json!({"command": "exponent", "seed": seed, "params": {"T": 200, "dt": 0.05, "N": 8}}))
}

#[test]
fn exponent_reruns_are_identical() {
    let a = run(&short_exponent(7)).unwrap();
    let b = run(&short_exponent(7)).unwrap();
    assert_eq!(a.estimates, b.estimates);
    assert_eq!(a.payload_json(), b.payload_json());
    assert_ne!(a.payload_json(), run(&short_exponent(8)).unwrap().payload_json());
}

#[test]
fn worker_count_does_not_change_the_payload() {
    let mut base = config(json!({"command": "gibbs", "seed": 4, "params": {"T": 200, "dt": 0.05, "N": 6, "arc_samples": 3}}));
    let reference = run(&base).unwrap().payload_json();
    for threads in [1, 3, 8] {
        base.threads = Some(threads);
        assert_eq!(run(&base).unwrap().payload_json(), reference, "threads = {threads}");
    }
}

#[test]
fn digest_ignores_threads_and_output() {
    let mut a = short_exponent(1);
    let d = run(&a).unwrap().input_digest;
    a.threads = Some(2);
    a.output.path = Some("elsewhere.json".into());
    assert_eq!(Report::new(&a).input_digest, d);
    a.seed = 2;
    assert_ne!(Report::new(&a).input_digest, d);
}

#[test]
fn zero_horizon_is_rejected_naming_t() {
    let c = config(json!({"command": "exponent", "params": {"T": 0}}));
    match run(&c) {
        Err(CliError::Precondition { field, .. }) => assert_eq!(field, "params.T"),
        other => panic!("expected a precondition error, got {other:?}"),
    }
    let e = run(&c).unwrap_err();
    assert!(e.to_string().contains("params.T"), "{e}");
    assert_eq!((e.code(), e.exit_code()), ("precondition", 2));
}

#[test]
fn validation_happens_before_compute() {
    // The shift is only checkable against T; a huge ensemble must not start.
    let c = config(json!({"command": "gibbs", "params": {"T": 1e9, "N": 1000, "shift": 1e9}}));
    let e = run(&c).unwrap_err();
    assert!(matches!(&e, CliError::Precondition { field, .. } if field == "params.shift"), "{e}");
    let c = config(json!({"command": "psi-u", "params": {"T": 100, "distances": [0.7]}}));
    assert!(matches!(run(&c), Err(CliError::Precondition { field, .. }) if field == "params.distances"));
    let c = config(json!({"command": "brownian-exponent", "params": {"dt": 0.05}}));
    assert!(matches!(run(&c), Err(CliError::Precondition { field, .. }) if field == "params.dt"));
}

#[test]
fn schema_errors_are_distinct() {
    let e = ExperimentConfig::from_value(json!({"command": "exponent", "params": {"horizon": 5}})).unwrap_err();
    assert_eq!((e.code(), e.exit_code()), ("schema", 2));
    assert!(e.to_string().contains("horizon"), "{e}");
    let e = ExperimentConfig::from_value(json!({"command": "no-such-command"})).unwrap_err();
    assert_eq!(e.code(), "schema");
}

#[test]
fn group_errors_are_distinct() {
    // A free group on two hyperbolic generators that do not close up a polygon.
    let c = config(json!({
        "command": "verify-group",
        "group": {"generators": [[[2.0, 0.0], [0.0, 0.5]], [[1.0, 1.0], [1.0, 2.0]]], "pairing": [1, 0, 3, 2]},
        "representation": "trivial",
    }));
    let e = run(&c).unwrap_err();
    assert_eq!((e.code(), e.exit_code()), ("group", 2), "{e}");
    let c = config(json!({"command": "verify-group", "group": "genus3"}));
    assert!(matches!(run(&c), Err(CliError::Precondition { field, .. }) if field == "group"));
}

#[test]
fn json_report_roundtrips() {
    let report = run(&short_exponent(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    emit(&report, Format::Json, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let back = Report::from_json(&text).unwrap();
    let mut expected = report.clone();
    expected.wall_clock = Default::default();
    expected.figure = None;
    assert_eq!(back, expected);
    assert_eq!(back.payload_json(), text);
}

#[test]
fn json_keys_are_sorted() {
    let text = run(&short_exponent(3)).unwrap().payload_json();
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
    assert!(!text.contains("wall_clock"));
}

#[test]
fn csv_has_a_header_and_one_row_per_estimate() {
    let report = run(&config(json!({"command": "verify-group"}))).unwrap();
    let csv = render_csv(&report);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), report.estimates.len() + 1);
    assert_eq!(lines[0], "name,value,ci95,samples");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    emit(&report, Format::Csv, &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), csv);
}

fn filled_cells(svg: &str) -> std::collections::BTreeSet<String> {
    svg.lines()
        .filter(|l| l.starts_with("<polygon") && !l.contains("fill=\"rgb(255,255,255)\""))
        .map(|l| l.split("<title>").nth(1).unwrap().split(':').next().unwrap().to_string())
        .collect()
}

#[test]
fn svg_of_an_atom_fills_one_cell() {
    let grid = GridSpec::comparison_default();
    let cell = grid.index(grid.decode(37));
    let svg = fiber_heatmap_svg(&EmpiricalMeasure::atom(grid, cell).unwrap(), "atom");
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("href"));
    assert_eq!(filled_cells(&svg).len(), 1);
}

#[test]
fn svg_is_only_available_with_a_figure() {
    let report = run(&short_exponent(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let e = emit(&report, Format::Svg, &dir.path().join("x.svg")).unwrap_err();
    assert!(matches!(&e, CliError::Precondition { field, .. } if field == "output.format"));
    let gibbs = run(&config(json!({"command": "gibbs", "params": {"T": 200, "N": 2, "arc_samples": 1}}))).unwrap();
    let path = dir.path().join("g.svg");
    emit(&gibbs, Format::Svg, &path).unwrap();
    assert!(fs::read_to_string(&path).unwrap().contains("<polygon"));
}

#[test]
fn emit_is_atomic_and_reports_the_path() {
    let report = run(&short_exponent(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    fs::write(&path, "old").unwrap();
    emit(&report, Format::Json, &path).unwrap();
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("out.json")]);
    let missing = dir.path().join("no/such/dir/out.json");
    let e = emit(&report, Format::Json, &missing).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    assert!(e.to_string().contains("no/such/dir/out.json"), "{e}");
}

#[test]
fn quasi_fuchsian_visibility_sees_one_attractor() {
    let c = config(json!({
        "command": "visibility",
        "representation": {"preset": "quasi-fuchsian-like"},
        "seed": 1,
        "params": {"T": 2000, "N": 6, "directions": 32},
    }));
    let r = run(&c).unwrap();
    assert_eq!(r.payload["attractor_count"], json!(1));
    assert_eq!(r.payload["f"], json!([1.0]));
}

#[test]
fn overrides_follow_dotted_paths() {
    let mut v = json!({"command": "exponent"});
    apply_override(&mut v, "params.T=500").unwrap();
    apply_override(&mut v, "representation=unitary").unwrap();
    apply_override(&mut v, "thresholds.expected_mean=-1").unwrap();
    assert_eq!(v["params"]["T"], json!(500));
    assert_eq!(v["representation"], json!("unitary"));
    let c = config(v);
    assert_eq!(c.params.t, Some(500.0));
    assert_eq!(c.thresholds.expected_mean, Some(-1.0));
    assert!(apply_override(&mut json!({}), "no_equals_sign").is_err());
    assert!(apply_override(&mut json!({"seed": 1}), "seed.x=1").is_err());
}

#[test]
fn cli_flags_override_the_file() {
    use clap::Parser;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"command": "exponent", "seed": 1, "params": {"T": 300}}"#).unwrap();
    let p = path.to_str().unwrap();
    let cli = Cli::try_parse_from(["foliate", "exponent", "--config", p, "--set", "params.N=3", "--seed", "9", "--format", "csv"])
        .unwrap();
    let c = load_config(&cli).unwrap();
    assert_eq!((c.seed, c.params.t, c.params.n, c.output.format), (9, Some(300.0), Some(3), Format::Csv));
    let cli = Cli::try_parse_from(["foliate", "gibbs", "--config", p]).unwrap();
    assert_eq!(load_config(&cli).unwrap_err().code(), "schema");
}

/// Every config field is documented in the shipped schema, and nothing else is.
#[test]
fn schema_file_matches_the_config_types() {
    let schema: Value = serde_json::from_str(include_str!("../schema/experiment.schema.json")).unwrap();
    let keys = |v: &Value| -> Vec<String> {
        let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };

    let mut params = serde_json::to_value(Params::default()).unwrap();
    let mut thresholds = serde_json::to_value(Thresholds::default()).unwrap();
    assert_eq!(params, json!({}));
    assert_eq!(thresholds, json!({}));
    // Fill every field named in the schema; the types must accept all of
    // them and serialize back exactly that set.
    for (name, prop) in schema["properties"]["params"]["properties"].as_object().unwrap() {
        let sample = match prop["type"].as_str().unwrap() {
            "number" => json!(0.5),
            "integer" => json!(2),
            "array" if prop["items"]["type"] == "integer" => json!([2, 2]),
            _ => json!([0.1, 0.2]),
        };
        params[name] = sample;
    }
    for (name, prop) in schema["properties"]["thresholds"]["properties"].as_object().unwrap() {
        thresholds[name] = if prop["type"] == "integer" { json!(1) } else { json!(0.5) };
    }
    let p: Params = serde_json::from_value(params.clone()).unwrap();
    let t: Thresholds = serde_json::from_value(thresholds.clone()).unwrap();
    assert_eq!(keys(&serde_json::to_value(p).unwrap()), keys(&params));
    assert_eq!(keys(&serde_json::to_value(t).unwrap()), keys(&thresholds));

    let mut c = ExperimentConfig::new(Command::Exponent);
    c.threads = Some(1);
    c.output.path = Some("x".into());
    assert_eq!(keys(&serde_json::to_value(c).unwrap()), keys(&schema["properties"]));
    let commands: Vec<&str> = schema["properties"]["command"]["enum"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(commands, Command::ALL.map(Command::name));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let c = ExperimentConfig::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
        foliate_cli::Settings::resolve(&c).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n > 10);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_foliate");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let ok = Process::new(bin).args(["verify-group", "--out", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(Report::from_json(&fs::read_to_string(&out).unwrap()).unwrap().pass);

    let fail = Process::new(bin)
        .args(["exponent", "--set", "params.T=100", "--set", "params.N=4"])
        .args(["--set", "thresholds.expected_mean=5", "--set", "thresholds.mean_tolerance=0.1", "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stdout).starts_with("name,value,ci95,samples\n"));

    let bad = Process::new(bin).args(["exponent", "--set", "params.T=0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&bad.stderr);
    assert!(msg.contains("error[precondition]") && msg.contains("params.T"), "{msg}");

    let io = Process::new(bin).args(["verify-group", "--out", "/nonexistent/dir/r.json"]).output().unwrap();
    assert_eq!(io.status.code(), Some(3));

    let threads = Process::new(bin).args(["verify-group"]).env("THREADS", "many").output().unwrap();
    assert_eq!(threads.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&threads.stderr).contains("THREADS"));
}
