use adiabat::filter::{verify_filter, FilterFunction, FilterReport, Orientation};

use super::{filter_spec, num, Check, Experiment, Outcome, PreflightModel};
use crate::config::{require_nonempty, ExperimentConfig};
use crate::error::CliResult;

/// Quadrature of the synthesized `W(t)` against the closed-form multiplier.
pub struct FilterCheck;

impl FilterCheck {
    pub fn report(&self, cfg: &ExperimentConfig) -> CliResult<FilterReport> {
        let spec = filter_spec(cfg, Orientation::Generator)?;
        let f = FilterFunction::synthesize(&spec, cfg.filter.truncation, cfg.filter.samples)?;
        Ok(verify_filter(&f, &cfg.grid.frequencies))
    }
}

impl Experiment for FilterCheck {
    fn kind(&self) -> &'static str {
        "filter-check"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_nonempty(&cfg.grid.frequencies, "frequencies", &mut errors);
        if cfg.filter.truncation.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            errors.push("filter.truncation must be positive".into());
        }
        if cfg.filter.samples.is_some_and(|n| n < 2 || n % 2 != 0) {
            errors.push("filter.samples must be even and at least 2".into());
        }
        errors
    }

    // no Hamiltonian involved
    fn preflight_models(&self, _cfg: &ExperimentConfig) -> CliResult<Vec<PreflightModel>> {
        Ok(Vec::new())
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let report = self.report(cfg)?;
        let hash = cfg.hash();
        let mut out = Outcome::new(&["config_hash", "omega", "exact_im", "quadrature_re", "quadrature_im", "error"]);
        for r in &report.rows {
            out.row(vec![
                hash.clone(),
                num(r.omega),
                num(r.exact_im),
                num(r.quadrature_re),
                num(r.quadrature_im),
                num(r.error),
            ]);
        }
        if let Some(max) = cfg.check("max_error_max") {
            out.checks.push(Check::at_most("max |quadrature − closed form|", report.max_error, max));
        }
        if let Some(max) = cfg.check("tail_max_max") {
            out.checks.push(Check::at_most("max |W| near the truncation", report.tail_max, max));
        }
        out.note("filter", &report);
        Ok(out)
    }
}
