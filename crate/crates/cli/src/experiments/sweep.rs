use adiabat::superadiabatic::diabatic_error_sweep;
use rayon::prelude::*;

use super::{family, num, observable, propagation_options, require_family, Check, Experiment, Outcome};
use crate::config::{require_nonempty, ExperimentConfig, ModelFamily};
use crate::error::CliResult;

/// Diabatic error of a single-site observable against ε, per chain length.
pub struct AdiabaticSweep;

impl Experiment for AdiabaticSweep {
    fn kind(&self) -> &'static str {
        "adiabatic-sweep"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_nonempty(&cfg.grid.epsilons, "epsilons", &mut errors);
        require_nonempty(&cfg.grid.sites, "sites", &mut errors);
        require_nonempty(&cfg.grid.s_points, "s_points", &mut errors);
        require_family(cfg, &[ModelFamily::Ising, ModelFamily::RotatingField], &mut errors);
        errors
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let opts = propagation_options(cfg)?;
        let tables = cfg
            .grid
            .sites
            .par_iter()
            .map(|&n| {
                let fam = family(cfg, n)?;
                let obs = observable(cfg, &fam)?;
                Ok((n, diabatic_error_sweep(&fam, &obs, &cfg.grid.epsilons, &cfg.grid.s_points, &opts)?))
            })
            .collect::<CliResult<Vec<_>>>()?;

        let mut out = Outcome::new(&["config_hash", "sites", "epsilon", "s", "error", "steps"]);
        let hash = cfg.hash();
        let mut fits = Vec::new();
        for (n, table) in &tables {
            for r in &table.rows {
                out.row(vec![
                    hash.clone(),
                    n.to_string(),
                    num(r.epsilon),
                    num(r.s),
                    num(r.error),
                    r.steps.to_string(),
                ]);
            }
            for f in &table.fits {
                fits.push(serde_json::json!({
                    "sites": n,
                    "s": f.s,
                    "slope": f.fit.slope,
                    "slope_ci95": f.fit.slope_ci95,
                    "intercept": f.fit.intercept,
                    "r_squared": f.fit.r_squared,
                }));
            }
        }
        out.note("fits", &fits);

        let (first_l, first) = &tables[0];
        let slope = |s: f64| first.slope_at(s);
        if let (Some(lo), Some(m)) = (cfg.check("mid_slope_min"), slope(0.5)) {
            out.checks.push(Check::at_least(&format!("slope(L={first_l}, s=0.5)"), m, lo));
        }
        if let (Some(hi), Some(m)) = (cfg.check("mid_slope_max"), slope(0.5)) {
            out.checks.push(Check::at_most(&format!("slope(L={first_l}, s=0.5)"), m, hi));
        }
        if let (Some(lo), Some(m)) = (cfg.check("end_slope_min"), slope(1.0)) {
            out.checks.push(Check::at_least(&format!("slope(L={first_l}, s=1)"), m, lo));
        }
        // relative change between the first and last chain length at the
        // first (ε, s) pair
        if let Some(max) = cfg.check("volume_change_max") {
            let (eps, s) = (cfg.grid.epsilons[0], cfg.grid.s_points[0]);
            let (last_l, last) = &tables[tables.len() - 1];
            let a = first.error_at(eps, s).unwrap_or(f64::NAN);
            let b = last.error_at(eps, s).unwrap_or(f64::NAN);
            let change = (b - a).abs() / a;
            out.note("volume_change", change);
            out.checks.push(Check::at_most(
                &format!("relative error change L={first_l}->{last_l}"),
                change,
                max,
            ));
        }
        Ok(out)
    }
}
