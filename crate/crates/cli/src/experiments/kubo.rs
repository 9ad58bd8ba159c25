use adiabat::dynamics::PropagatorRegistry;
use adiabat::filter::Orientation;
use adiabat::kubo::{self, ResponseProblem};
use adiabat::linalg::{self, pauli_x, pauli_z};
use adiabat::operators::{embed, LocalOperator};
use serde::Serialize;

use super::{
    family, filter_spec, num, observable, require_family, Check, Experiment, Outcome, PathHamiltonian, PreflightModel,
};
use crate::config::{require_nonempty, ExperimentConfig, ModelFamily};
use crate::error::{CliError, CliResult};

/// Linear response by the quasi-adiabatic, static, regularized-Kubo and
/// dynamic routes.
pub struct KuboExperiment;

#[derive(Debug, Clone, Serialize)]
pub struct ResponseReport {
    pub sites: usize,
    pub quasiadiabatic: f64,
    pub imaginary_residue: f64,
    pub static_oracle: f64,
    pub kubo_extrapolated: f64,
    pub kubo_extrapolation_error: f64,
    pub dynamic: Vec<(f64, f64)>,
    pub work: f64,
    pub gap_qa_static: f64,
    pub gap_kubo_qa: f64,
    /// `|χ_dyn(ε) − χ_static|` shrinks along the dynamic ε grid.
    pub dynamic_approaches_static: bool,
}

fn problem(cfg: &ExperimentConfig, sites: usize) -> CliResult<ResponseProblem> {
    match cfg.model.family {
        ModelFamily::TwoLevel => Ok(ResponseProblem::new(-pauli_z(), pauli_x(), cfg.model.observable.matrix())?),
        ModelFamily::Ising => {
            let fam = family(cfg, sites)?;
            let chain = fam.chain();
            let center = chain.center();
            let r = cfg.model.perturbation_radius;
            let lo = center.saturating_sub(r);
            let hi = (center + r).min(chain.sites() - 1);
            let mut v = linalg::zeros(chain.dim());
            for x in lo..=hi {
                v += embed(&LocalOperator::site(x, pauli_z())?, chain)?.matrix();
            }
            let j = observable(cfg, &fam)?;
            Ok(ResponseProblem::new(fam.hamiltonian_matrix(0.0), v, j)?)
        }
        other => Err(CliError::Config(format!("kubo does not support model family {other:?}"))),
    }
}

fn lengths(cfg: &ExperimentConfig) -> Vec<usize> {
    if cfg.model.family == ModelFamily::TwoLevel {
        vec![1]
    } else {
        cfg.grid.sites.clone()
    }
}

impl KuboExperiment {
    pub fn reports(&self, cfg: &ExperimentConfig) -> CliResult<Vec<ResponseReport>> {
        let filter = filter_spec(cfg, Orientation::Inverse)?;
        let propagator = PropagatorRegistry::default().get(&cfg.propagation.propagator)?;
        let alpha = cfg.grid.alpha.unwrap_or(1e-2);
        lengths(cfg)
            .iter()
            .map(|&n| {
                let prob = problem(cfg, n)?;
                let qa = kubo::chi_quasiadiabatic(&prob, &filter)?;
                let stat = kubo::chi_static_oracle(&prob, kubo::DEFAULT_ALPHA_STEP)?;
                let table = kubo::chi_kubo_regularized(&prob, &cfg.grid.epsilons)?;
                let dynamic = cfg
                    .grid
                    .dynamic_epsilons
                    .iter()
                    .map(|&e| {
                        Ok((e, kubo::chi_dynamic(&prob, alpha, e, None, cfg.propagation.dt, propagator.as_ref())?))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let gaps: Vec<f64> = dynamic.iter().map(|(_, v)| (v - stat).abs()).collect();
                Ok(ResponseReport {
                    sites: n,
                    quasiadiabatic: qa.value,
                    imaginary_residue: qa.imaginary_residue,
                    static_oracle: stat,
                    kubo_extrapolated: table.extrapolated,
                    kubo_extrapolation_error: table.extrapolation_error,
                    work: kubo::work_check(&prob, &filter)?,
                    gap_qa_static: (qa.value - stat).abs(),
                    gap_kubo_qa: (table.extrapolated - qa.value).abs(),
                    dynamic_approaches_static: gaps.windows(2).all(|w| w[1] < w[0]),
                    dynamic,
                })
            })
            .collect()
    }
}

impl Experiment for KuboExperiment {
    fn kind(&self) -> &'static str {
        "kubo"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_nonempty(&cfg.grid.epsilons, "epsilons", &mut errors);
        require_family(cfg, &[ModelFamily::TwoLevel, ModelFamily::Ising], &mut errors);
        if cfg.model.family == ModelFamily::Ising {
            require_nonempty(&cfg.grid.sites, "sites", &mut errors);
        }
        if cfg.grid.alpha == Some(0.0) {
            errors.push("grid.alpha must be nonzero".into());
        }
        errors
    }

    fn uses_filter(&self) -> bool {
        true
    }

    /// The response is taken around the unperturbed `H_i`, a fixed
    /// Hamiltonian, so every path point sees the same gap.
    fn preflight_models(&self, cfg: &ExperimentConfig) -> CliResult<Vec<PreflightModel>> {
        Ok(lengths(cfg)
            .into_iter()
            .map(|n| {
                let mut m = PreflightModel::chain(cfg, n);
                let owned = cfg.clone();
                m.label = format!("H_i L={n}");
                if cfg.model.family == ModelFamily::TwoLevel {
                    m.dim = 2;
                }
                m.build = Box::new(move || {
                    let h = problem(&owned, n)?.hamiltonian().clone();
                    Ok(Box::new(move |_| h.clone()) as PathHamiltonian)
                });
                m
            })
            .collect())
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let reports = self.reports(cfg)?;
        let hash = cfg.hash();
        let mut out = Outcome::new(&["config_hash", "sites", "path", "epsilon", "value"]);
        for r in &reports {
            let n = r.sites.to_string();
            let mut push = |path: &str, eps: Option<f64>, v: f64| {
                out.rows.push(vec![hash.clone(), n.clone(), path.into(), eps.map(num).unwrap_or_default(), num(v)]);
            };
            push("quasiadiabatic", None, r.quasiadiabatic);
            push("static", None, r.static_oracle);
            let prob = problem(cfg, r.sites)?;
            for &e in &cfg.grid.epsilons {
                push("kubo-regularized", Some(e), kubo::chi_kubo_at(&prob, e)?);
            }
            push("kubo-extrapolated", None, r.kubo_extrapolated);
            for &(e, v) in &r.dynamic {
                push("dynamic", Some(e), v);
            }
            push("work", None, r.work);
        }
        for r in &reports {
            let l = r.sites;
            if let Some(max) = cfg.check("qa_static_max") {
                out.checks.push(Check::at_most(&format!("|χ_QA − χ_static| (L={l})"), r.gap_qa_static, max));
            }
            if let Some(max) = cfg.check("kubo_qa_max") {
                out.checks.push(Check::at_most(&format!("|χ_Kubo − χ_QA| (L={l})"), r.gap_kubo_qa, max));
            }
            if let Some(max) = cfg.check("work_max") {
                out.checks.push(Check::at_most(&format!("work (L={l})"), r.work, max));
            }
            if cfg.check("dynamic_monotone").is_some() && r.dynamic.len() >= 2 {
                out.checks.push(Check::holds(&format!("dynamic path approaches static (L={l})"), r.dynamic_approaches_static));
            }
        }
        if let (Some(max), Some(first), Some(last)) = (cfg.check("volume_change_max"), reports.first(), reports.last()) {
            let change = ((last.quasiadiabatic - first.quasiadiabatic) / first.quasiadiabatic).abs();
            out.note("volume_change", change);
            out.checks.push(Check::at_most(
                &format!("χ_QA change L={}->{}", first.sites, last.sites),
                change,
                max,
            ));
        }
        out.note("responses", &reports);
        Ok(out)
    }
}
