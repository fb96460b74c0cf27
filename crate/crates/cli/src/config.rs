use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use foliate::cocycle::{Representation, RepresentationJson};
use foliate::surface::{genus2, punctured_torus, FuchsianGroup, GroupJson};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Exponent,
    BrownianExponent,
    Gibbs,
    Visibility,
    ComparePm,
    HarmonicCheck,
    Distortion,
    PsiU,
    VerifyGroup,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Exponent,
        Command::BrownianExponent,
        Command::Gibbs,
        Command::Visibility,
        Command::ComparePm,
        Command::HarmonicCheck,
        Command::Distortion,
        Command::PsiU,
        Command::VerifyGroup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Exponent => "exponent",
            Command::BrownianExponent => "brownian-exponent",
            Command::Gibbs => "gibbs",
            Command::Visibility => "visibility",
            Command::ComparePm => "compare-pm",
            Command::HarmonicCheck => "harmonic-check",
            Command::Distortion => "distortion",
            Command::PsiU => "psi-u",
            Command::VerifyGroup => "verify-group",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Whether the command produces a fiber heat map.
    pub fn has_figure(self) -> bool {
        matches!(self, Command::Gibbs | Command::ComparePm)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSource {
    Preset(String),
    Inline(GroupJson),
}

impl Default for GroupSource {
    fn default() -> Self {
        GroupSource::Preset("genus2".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepPreset {
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RepSource {
    Name(String),
    Preset(RepPreset),
    Inline(RepresentationJson),
}

impl Default for RepSource {
    fn default() -> Self {
        RepSource::Name("fuchsian".into())
    }
}

/// Numeric parameters. Unset fields take per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Shift of the invariance defect.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// Bounded-Lipschitz radius for attractor clustering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// Base point `[re, im]` in the upper half-plane.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
    /// Fiber point in the affine chart, `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// Amplitude of the metric perturbation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub back_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Position grid `[radial, angular]` for per-cell statistics: the
    /// base-marginal positivity check and fiber concentration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_grid: Option<[u32; 2]>,
    /// Horizons of the forward/backward regular-set probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<f64>>,
    /// BL radius below which forward and backward averages count as equal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regular_threshold: Option<f64>,
    /// Angle of the boundary atom in the second harmonic example.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_mass_angle: Option<f64>,
}

/// Declared pass criteria. Unset fields are not checked.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attractor_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_median_bl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_arc_bl: Option<f64>,
    /// Slack added to `2/T` in the invariance-defect bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_unlabeled_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_continuity_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_tv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_passing_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_relative_change: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_empty_cells: Option<usize>,
    /// Bound on `|psi - 1|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_psi_deviation: Option<f64>,
    /// Bound on `|log psi|` over all pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_log_difference: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub group: GroupSource,
    #[serde(default)]
    pub representation: RepSource,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: Output,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            group: GroupSource::default(),
            representation: RepSource::default(),
            seed: 0,
            threads: None,
            params: Params::default(),
            thresholds: Thresholds::default(),
            output: Output::default(),
        }
    }

    pub fn from_value(v: Value) -> Result<Self, CliError> {
        serde_json::from_value(v).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(s).map_err(|e| CliError::Schema(e.to_string()))?;
        Self::from_value(v)
    }

    /// The part of the config that determines the results: worker count and
    /// output destination are dropped.
    pub fn resolved_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("threads");
            o.remove("output");
        }
        v
    }

    pub fn group(&self) -> Result<FuchsianGroup<f64>, CliError> {
        match &self.group {
            GroupSource::Preset(name) => match name.as_str() {
                "genus2" => genus2().map_err(CliError::Group),
                "punctured-torus" | "punctured_torus" => punctured_torus().map_err(CliError::Group),
                other => Err(CliError::precondition("group", format!("unknown preset {other:?}"))),
            },
            GroupSource::Inline(json) => json.into_group(1e-8).map(|(g, _)| g).map_err(CliError::Group),
        }
    }

    pub fn representation(&self, group: &FuchsianGroup<f64>) -> Result<Representation, CliError> {
        let named = |name: &str, theta: Option<f64>| -> Result<Representation, CliError> {
            let rep = match name {
                "fuchsian" => Ok(Representation::fuchsian(group)),
                "unitary" => Representation::unitary(group),
                "trivial" => Ok(Representation::trivial(group.generators().len())),
                "quasi-fuchsian-like" => Representation::quasi_fuchsian_like(group, theta.unwrap_or(0.5)),
                other => return Err(CliError::precondition("representation", format!("unknown preset {other:?}"))),
            };
            rep.map_err(CliError::from_core)
        };
        let rep = match &self.representation {
            RepSource::Name(n) => named(n, None)?,
            RepSource::Preset(p) => named(&p.preset, p.theta)?,
            RepSource::Inline(json) => json.build().map_err(CliError::from_core)?,
        };
        if rep.images().len() != group.generators().len() {
            return Err(CliError::precondition(
                "representation",
                format!("{} images for {} generators", rep.images().len(), group.generators().len()),
            ));
        }
        rep.check_relator(group, 1e-8).map_err(CliError::from_core)?;
        Ok(rep)
    }
}

/// Applies `dotted.path=value` to a JSON config. The value is parsed as JSON
/// when possible and taken as a string otherwise.
pub fn apply_override(config: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Schema(format!("--set expects path=value, got {assignment:?}")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Schema(format!("bad path {path:?}")));
    }
    let mut node = config;
    for (i, key) in keys.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| CliError::Schema(format!("{path}: {key} is not inside an object")))?;
        if i + 1 == keys.len() {
            obj.insert((*key).to_string(), value);
            return Ok(());
        }
        node = obj.entry((*key).to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
