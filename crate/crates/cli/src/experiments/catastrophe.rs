use adiabat::dynamics::catastrophe_experiment;

use super::{field_path, num, propagation_options, require_family, Check, Experiment, Outcome};
use crate::config::{require_nonempty, ExperimentConfig, ModelFamily};
use crate::error::CliResult;

/// Global fidelity against local accuracy for the rotating-field chain.
pub struct Catastrophe;

impl Experiment for Catastrophe {
    fn kind(&self) -> &'static str {
        "catastrophe"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_nonempty(&cfg.grid.epsilons, "epsilons", &mut errors);
        require_family(cfg, &[ModelFamily::RotatingField], &mut errors);
        if cfg.grid.sites.len() < 2 {
            errors.push("grid.sites needs at least two chain lengths for the fidelity fit".into());
        }
        if cfg.model.observable_site.is_some_and(|s| s != 0) {
            errors.push("the catastrophe observable acts on site 0".into());
        }
        // one fixed step for every length, so each site sees the same
        // single-site propagator
        if cfg.propagation.max_step.is_none() {
            errors.push("catastrophe needs propagation.max_step so that all lengths share one step".into());
        }
        errors
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let opts = propagation_options(cfg)?;
        let hash = cfg.hash();
        let mut out = Outcome::new(&["config_hash", "epsilon", "sites", "metric", "value"]);
        let mut summaries = Vec::new();
        for &eps in &cfg.grid.epsilons {
            let table = catastrophe_experiment(
                eps,
                &cfg.grid.sites,
                &field_path(cfg),
                &cfg.model.observable.matrix(),
                &opts,
            )?;
            for r in &table.rows {
                for (metric, value) in [
                    ("fidelity", r.fidelity),
                    ("log_fidelity", r.log_fidelity),
                    ("local_error", r.local_error),
                    ("steps", r.steps as f64),
                ] {
                    out.row(vec![hash.clone(), num(eps), r.sites.to_string(), metric.into(), num(value)]);
                }
            }
            let fit = table.log_fidelity_fit;
            if let Some(min) = cfg.check("r_squared_min") {
                out.checks.push(Check::at_least(&format!("log-fidelity fit R² (ε={eps})"), fit.r_squared, min));
                out.checks.push(Check::holds(&format!("log-fidelity decreases (ε={eps})"), fit.slope < 0.0));
            }
            if let Some(max) = cfg.check("local_spread_max") {
                out.checks.push(Check::at_most(
                    &format!("local error spread (ε={eps})"),
                    table.local_error_spread,
                    max,
                ));
            }
            summaries.push(serde_json::json!({
                "epsilon": eps,
                "log_fidelity_slope": fit.slope,
                "log_fidelity_slope_ci95": fit.slope_ci95,
                "r_squared": fit.r_squared,
                "local_error_spread": table.local_error_spread,
            }));
        }
        out.note("fits", summaries);
        Ok(out)
    }
}
