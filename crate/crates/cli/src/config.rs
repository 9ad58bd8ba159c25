//! Experiment configuration files (TOML) and their canonical hash.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const DEFAULT_MEMORY_CAP_GIB: f64 = 2.0;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: String,
    /// Stem of the output files; defaults to the kind.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub cone: ConeConfig,
    /// Contract thresholds enforced under `--assert`; keys depend on the kind.
    #[serde(default)]
    pub checks: BTreeMap<String, f64>,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    Ising,
    RotatingField,
    TwoLevel,
    RandomLocal,
}

impl ModelFamily {
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Ising => "ising",
            ModelFamily::RotatingField => "rotating-field",
            ModelFamily::TwoLevel => "two-level",
            ModelFamily::RandomLocal => "random-local",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FieldPathKind {
    SwitchedRotation,
    LinearRotation,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> adiabat::linalg::Matrix {
        match self {
            Pauli::X => adiabat::linalg::pauli_x(),
            Pauli::Y => adiabat::linalg::pauli_y(),
            Pauli::Z => adiabat::linalg::pauli_z(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub family: ModelFamily,
    pub coupling: f64,
    pub field: f64,
    pub amplitude: f64,
    pub longitudinal: f64,
    pub path: FieldPathKind,
    pub theta_max: f64,
    pub observable: Pauli,
    /// Observable site; the chain centre when absent.
    pub observable_site: Option<usize>,
    /// Kubo perturbation: `Z` summed over sites within this radius of the centre.
    pub perturbation_radius: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            family: ModelFamily::Ising,
            coupling: 0.5,
            field: 1.0,
            amplitude: 0.5,
            longitudinal: 0.0,
            path: FieldPathKind::SwitchedRotation,
            theta_max: 1.2,
            observable: Pauli::Y,
            observable_site: None,
            perturbation_radius: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub epsilons: Vec<f64>,
    pub sites: Vec<usize>,
    pub s_points: Vec<f64>,
    pub times: Vec<f64>,
    pub distances: Vec<usize>,
    pub orders: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub dynamic_epsilons: Vec<f64>,
    pub alpha: Option<f64>,
    /// Number of random problems, dressing nodes or transport steps.
    pub count: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub gamma: f64,
    pub shape: String,
    pub truncation: Option<f64>,
    pub samples: Option<usize>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            gamma: 0.5,
            shape: adiabat::filter::DEFAULT_SHAPE.to_string(),
            truncation: None,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationConfig {
    pub propagator: String,
    pub step_factor: f64,
    pub max_step: Option<f64>,
    /// Fixed time step of the switched-perturbation runs.
    pub dt: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            propagator: adiabat::dynamics::DEFAULT_PROPAGATOR.to_string(),
            step_factor: adiabat::dynamics::DEFAULT_STEP_FACTOR,
            max_step: None,
            dt: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ConeConfig {
    pub floor: f64,
    pub saturation: f64,
    pub min_distance: usize,
    pub max_time: f64,
}

impl Default for ConeConfig {
    fn default() -> Self {
        let w = adiabat::dynamics::ConeWindow::default();
        ConeConfig {
            floor: w.floor,
            saturation: w.saturation,
            min_distance: w.min_distance,
            max_time: w.max_time,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    pub memory_cap_gib: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            memory_cap_gib: DEFAULT_MEMORY_CAP_GIB,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.clone())
    }

    /// SHA-256 of the resolved config serialized as JSON with sorted keys.
    /// Defaults are filled in first, so reordering keys or spelling out a
    /// default value leaves the hash unchanged.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&sort_keys(value)).expect("json serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn check(&self, key: &str) -> Option<f64> {
        self.checks.get(key).copied()
    }

    /// Structural checks shared by every kind.
    pub fn validate_common(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let positive = |v: f64| v.is_finite() && v > 0.0;
        for (k, v) in &self.checks {
            if !v.is_finite() || *v < 0.0 {
                errors.push(format!("check {k} must be a nonnegative number, got {v}"));
            }
        }
        if !positive(self.filter.gamma) {
            errors.push(format!("filter.gamma must be positive, got {}", self.filter.gamma));
        }
        if !positive(self.propagation.step_factor) {
            errors.push("propagation.step_factor must be positive".into());
        }
        if !positive(self.propagation.dt) {
            errors.push("propagation.dt must be positive".into());
        }
        if self.propagation.max_step.is_some_and(|h| !positive(h)) {
            errors.push("propagation.max_step must be positive".into());
        }
        if !positive(self.limits.memory_cap_gib) {
            errors.push("limits.memory_cap_gib must be positive".into());
        }
        if self.workers == Some(0) {
            errors.push("workers must be at least 1".into());
        }
        if self.grid.epsilons.iter().chain(&self.grid.dynamic_epsilons).any(|e| !positive(*e)) {
            errors.push("ε values must be positive".into());
        }
        if self.grid.s_points.iter().any(|s| !(0.0..=1.0).contains(s)) {
            errors.push("s points must lie in [0, 1]".into());
        }
        if self.grid.sites.contains(&0) {
            errors.push("chains need at least one site".into());
        }
        errors
    }
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Fails with a config error naming the field when a required grid is empty.
pub fn require_nonempty<T>(items: &[T], field: &str, errors: &mut Vec<String>) {
    if items.is_empty() {
        errors.push(format!("grid.{field} must be nonempty"));
    }
}
