//! Experiment kinds behind a name-keyed registry of trait objects.

use std::collections::BTreeMap;
use std::sync::Arc;

use adiabat::dynamics::{PropagationOptions, PropagatorRegistry};
use adiabat::filter::{FilterSpec, Orientation, ShapeRegistry};
use adiabat::linalg::Matrix;
use adiabat::models::{
    driven_ising_chain, rotating_field_chain, FieldPath, HamiltonianFamily, IsingParams, SwitchFunction,
};
use adiabat::operators::{embed, LocalOperator};
use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, FieldPathKind, ModelFamily};
use crate::error::{CliError, CliResult};

mod catastrophe;
mod checks;
mod cone;
mod dressing;
mod filter_check;
mod kubo;
mod sweep;

pub use kubo::KuboExperiment;

/// One contract test; `passed` is evaluated at construction.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, max: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("<= {max:e}"),
            passed: value <= max,
        }
    }

    pub fn at_least(name: &str, value: f64, min: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!(">= {min:e}"),
            passed: value >= min,
        }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: "true".into(),
            passed: ok,
        }
    }
}

/// Rows for the CSV body plus the JSON summary material.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn new(columns: &[&'static str]) -> Self {
        Outcome {
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.into(), serde_json::to_value(value).expect("summary value serializes"));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub type PathHamiltonian = Box<dyn Fn(f64) -> Matrix + Send + Sync>;

/// A Hamiltonian path for the preflight. `build` runs only after the
/// memory estimate for `dim` has passed.
pub struct PreflightModel {
    pub label: String,
    pub dim: usize,
    pub build: Box<dyn FnOnce() -> CliResult<PathHamiltonian> + Send>,
}

impl PreflightModel {
    /// A spin-½ chain family of the configured model.
    pub fn chain(cfg: &ExperimentConfig, sites: usize) -> Self {
        let cfg = cfg.clone();
        PreflightModel {
            label: format!("{} L={sites}", cfg.model.family.name()),
            dim: 1usize.checked_shl(sites as u32).unwrap_or(usize::MAX),
            build: Box::new(move || {
                let fam = family(&cfg, sites)?;
                Ok(Box::new(move |s| fam.hamiltonian_matrix(s)) as PathHamiltonian)
            }),
        }
    }

    pub fn fixed(label: impl Into<String>, h: Matrix) -> Self {
        PreflightModel {
            label: label.into(),
            dim: h.nrows(),
            build: Box::new(move || Ok(Box::new(move |_| h.clone()) as PathHamiltonian)),
        }
    }
}

pub trait Experiment: Send + Sync {
    fn kind(&self) -> &'static str;

    /// Kind-specific schema errors.
    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String>;

    /// Whether the experiment builds quasi-adiabatic maps with `filter.gamma`.
    fn uses_filter(&self) -> bool {
        false
    }

    /// Hamiltonians whose gap the preflight inspects.
    fn preflight_models(&self, cfg: &ExperimentConfig) -> CliResult<Vec<PreflightModel>> {
        Ok(cfg.grid.sites.iter().map(|&n| PreflightModel::chain(cfg, n)).collect())
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome>;
}

pub struct ExperimentRegistry {
    kinds: Vec<Arc<dyn Experiment>>,
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        let mut r = ExperimentRegistry { kinds: Vec::new() };
        r.register(Arc::new(sweep::AdiabaticSweep));
        r.register(Arc::new(catastrophe::Catastrophe));
        r.register(Arc::new(KuboExperiment));
        r.register(Arc::new(filter_check::FilterCheck));
        r.register(Arc::new(cone::LrCone));
        r.register(Arc::new(dressing::DressingDiagnostics));
        r.register(Arc::new(checks::LiouvillianIdentity));
        r.register(Arc::new(checks::GeneratorEquation));
        r.register(Arc::new(checks::TransportAgreement));
        r
    }
}

impl ExperimentRegistry {
    pub fn register(&mut self, e: Arc<dyn Experiment>) {
        self.kinds.retain(|k| k.kind() != e.kind());
        self.kinds.push(e);
    }

    pub fn get(&self, kind: &str) -> CliResult<Arc<dyn Experiment>> {
        self.kinds.iter().find(|k| k.kind() == kind).cloned().ok_or_else(|| {
            CliError::Config(format!("unknown experiment kind {kind:?}; known: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.kinds.iter().map(|k| k.kind()).collect()
    }
}

/// Shortest round-trip decimal form; stable across runs.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn filter_spec(cfg: &ExperimentConfig, orientation: Orientation) -> CliResult<FilterSpec> {
    let shape = ShapeRegistry::default().get(&cfg.filter.shape)?;
    Ok(FilterSpec::new(cfg.filter.gamma, shape, orientation)?)
}

pub fn propagation_options(cfg: &ExperimentConfig) -> CliResult<PropagationOptions> {
    let propagator = PropagatorRegistry::default().get(&cfg.propagation.propagator)?;
    Ok(PropagationOptions {
        propagator,
        step_factor: cfg.propagation.step_factor,
        max_step: cfg.propagation.max_step,
        ..Default::default()
    })
}

pub fn family(cfg: &ExperimentConfig, sites: usize) -> CliResult<HamiltonianFamily> {
    let m = &cfg.model;
    let switch = SwitchFunction::default();
    Ok(match m.family {
        ModelFamily::Ising => driven_ising_chain(
            sites,
            IsingParams::transverse(m.coupling, m.field, m.amplitude).with_longitudinal(m.longitudinal),
            Arc::new(switch),
        )?,
        ModelFamily::RotatingField => rotating_field_chain(sites, field_path(cfg))?,
        other => {
            return Err(CliError::Config(format!(
                "model family {other:?} has no driven family; use ising or rotating-field"
            )))
        }
    })
}

pub fn field_path(cfg: &ExperimentConfig) -> FieldPath {
    match cfg.model.path {
        FieldPathKind::SwitchedRotation => FieldPath::switched_rotation(cfg.model.theta_max, SwitchFunction::default()),
        FieldPathKind::LinearRotation => FieldPath::linear_rotation(cfg.model.theta_max),
    }
}

/// The configured single-site observable embedded in the chain.
pub fn observable(cfg: &ExperimentConfig, fam: &HamiltonianFamily) -> CliResult<Matrix> {
    let site = cfg.model.observable_site.unwrap_or_else(|| fam.chain().center());
    if site >= fam.chain().sites() {
        return Err(CliError::Config(format!(
            "observable site {site} outside a chain of {} sites",
            fam.chain().sites()
        )));
    }
    let op = LocalOperator::site(site, cfg.model.observable.matrix())?;
    Ok(embed(&op, fam.chain())?.into_matrix())
}

pub fn require_family(cfg: &ExperimentConfig, allowed: &[ModelFamily], errors: &mut Vec<String>) {
    if !allowed.contains(&cfg.model.family) {
        errors.push(format!(
            "model.family {:?} is not supported by {}; expected one of {:?}",
            cfg.model.family, cfg.kind, allowed
        ));
    }
}
