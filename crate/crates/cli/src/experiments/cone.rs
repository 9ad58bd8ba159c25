use adiabat::dynamics::{fit_cone, lieb_robinson_profile, ConeWindow};
use adiabat::linalg::pauli_x;
use adiabat::operators::LocalOperator;

use super::{family, num, require_family, Check, Experiment, Outcome};
use crate::config::{require_nonempty, ExperimentConfig, ModelFamily};
use crate::error::CliResult;

/// `‖[τ_t(X_0), X_d]‖` on the Ising chain at a fixed `s`, with an
/// exponential light-cone fit.
pub struct LrCone;

impl Experiment for LrCone {
    fn kind(&self) -> &'static str {
        "lr-cone"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_nonempty(&cfg.grid.times, "times", &mut errors);
        require_nonempty(&cfg.grid.distances, "distances", &mut errors);
        require_family(cfg, &[ModelFamily::Ising], &mut errors);
        if cfg.grid.sites.len() != 1 {
            errors.push("lr-cone takes exactly one chain length in grid.sites".into());
        }
        if let Some(&n) = cfg.grid.sites.first() {
            if cfg.grid.distances.iter().any(|&d| d == 0 || d >= n) {
                errors.push(format!("distances must lie in 1..{n}"));
            }
        }
        if cfg.grid.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            errors.push("times must be nonnegative".into());
        }
        errors
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let fam = family(cfg, cfg.grid.sites[0])?;
        let s = cfg.grid.s_points.first().copied().unwrap_or(0.0);
        let h = fam.hamiltonian_matrix(s);
        let a = LocalOperator::site(0, pauli_x())?;
        let table = lieb_robinson_profile(&h, fam.chain(), &a, &pauli_x(), &cfg.grid.distances, &cfg.grid.times)?;
        let window = ConeWindow {
            floor: cfg.cone.floor,
            saturation: cfg.cone.saturation,
            min_distance: cfg.cone.min_distance,
            max_time: cfg.cone.max_time,
        };
        let fit = fit_cone(&table, &window)?;

        let hash = cfg.hash();
        let mut out = Outcome::new(&["config_hash", "time", "distance", "value"]);
        for p in &table.points {
            out.row(vec![hash.clone(), num(p.time), p.distance.to_string(), num(p.value)]);
        }
        let at_zero = table
            .points
            .iter()
            .filter(|p| p.time == 0.0)
            .map(|p| p.value)
            .fold(0.0, f64::max);
        if let Some(max) = cfg.check("residual_max") {
            out.checks.push(Check::at_most("relative log residual", fit.relative_residual, max));
        }
        if let Some(min) = cfg.check("mu_min") {
            out.checks.push(Check::at_least("decay rate μ", fit.mu, min));
            out.checks.push(Check::holds("velocity is finite", fit.velocity.is_finite()));
        }
        if let Some(max) = cfg.check("t0_commutator_max") {
            out.checks.push(Check::at_most("max commutator at t = 0", at_zero, max));
        }
        out.note("fits", [&fit]);
        out.note("window", window);
        out.note("saturation_bound", table.saturation_bound);
        Ok(out)
    }
}
