use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use serde_json::Value;

use crate::commands::run;
use crate::config::{apply_override, Command, ExperimentConfig, Format};
use crate::emit::{emit, render};
use crate::error::CliError;

#[derive(Clone, Debug, Parser)]
#[command(name = "foliate", about = "Run one experiment and write its report")]
pub struct Cli {
    /// exponent | brownian-exponent | gibbs | visibility | compare-pm |
    /// harmonic-check | distortion | psi-u | verify-group
    pub command: String,

    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Override a config field by dotted path, e.g. `params.T=500`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub sets: Vec<String>,

    #[arg(long)]
    pub out: Option<PathBuf>,

    /// json | csv | svg
    #[arg(long)]
    pub format: Option<String>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads; falls back to the THREADS environment variable.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Builds the resolved config: file, then `--set` overrides, then the
/// dedicated flags.
pub fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let command =
        Command::parse(&cli.command).ok_or_else(|| CliError::Schema(format!("unknown command {:?}", cli.command)))?;
    let mut v = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?
        }
        None => Value::Object(Default::default()),
    };
    let obj = v.as_object_mut().ok_or_else(|| CliError::Schema("config must be a JSON object".into()))?;
    match obj.get("command").and_then(Value::as_str) {
        Some(c) if c != command.name() => {
            return Err(CliError::Schema(format!("command: config says {c:?} but {:?} was requested", command.name())))
        }
        _ => {
            obj.insert("command".into(), Value::String(command.name().into()));
        }
    }
    for s in &cli.sets {
        apply_override(&mut v, s)?;
    }
    if let Some(seed) = cli.seed {
        apply_override(&mut v, &format!("seed={seed}"))?;
    }
    if let Some(t) = cli.threads {
        apply_override(&mut v, &format!("threads={t}"))?;
    }
    if let Some(out) = &cli.out {
        let o = v.as_object_mut().expect("object").entry("output").or_insert_with(|| Value::Object(Default::default()));
        o.as_object_mut()
            .ok_or_else(|| CliError::Schema("output must be an object".into()))?
            .insert("path".into(), Value::String(out.to_string_lossy().into_owned()));
    }
    if let Some(f) = &cli.format {
        Format::parse(f).ok_or_else(|| CliError::Schema(format!("format: expected json, csv or svg, got {f:?}")))?;
        apply_override(&mut v, &format!("output.format=\"{f}\""))?;
    }
    ExperimentConfig::from_value(v)
}

fn execute_inner(cli: &Cli) -> Result<bool, CliError> {
    let config = load_config(cli)?;
    let report = run(&config)?;
    match &config.output.path {
        Some(path) => emit(&report, config.output.format, path)?,
        None => {
            let body = render(&report, config.output.format)?;
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })?;
        }
    }
    for c in &report.checks {
        eprintln!("{} {} ({} {:?} {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.relation, c.threshold);
    }
    eprintln!("{}: {} steps in {:.2?}", config.command.name(), report.steps, report.wall_clock);
    Ok(report.pass)
}

/// Runs the CLI and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match execute_inner(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}
