use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{Command, ExperimentConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    /// Half-width of the 95% confidence interval; 0 for deterministic values.
    pub ci95: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn new(name: &str, value: f64, ci95: f64, samples: u64) -> Self {
        Self { name: name.to_string(), value, ci95, samples }
    }

    pub fn exact(name: &str, value: f64) -> Self {
        Self::new(name, value, 0.0, 1)
    }
}

/// Direction of a threshold comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    Below,
    AtLeast,
    Above,
    Equal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, relation: Relation, threshold: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => value <= threshold,
            Relation::Below => value < threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Above => value > threshold,
            Relation::Equal => value == threshold,
        };
        Self { name: name.to_string(), value, relation, threshold, pass }
    }
}

/// Outcome of one command. Everything except `wall_clock` is a pure function
/// of the resolved config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Command,
    pub input_digest: String,
    pub estimates: Vec<Estimate>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub steps: u64,
    pub payload: Value,
    #[serde(skip)]
    pub figure: Option<String>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            command: config.command,
            input_digest: digest(&config.resolved_value()),
            estimates: Vec::new(),
            checks: Vec::new(),
            pass: true,
            steps: 0,
            payload: Value::Null,
            figure: None,
            wall_clock: Duration::ZERO,
        }
    }

    pub fn estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub(crate) fn push_check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    /// The deterministic part of the report as canonical JSON (sorted keys).
    pub fn payload_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// SHA-256 of the canonical serialization of `v`.
pub fn digest(v: &Value) -> String {
    let canonical = serde_json::to_string(v).expect("value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
