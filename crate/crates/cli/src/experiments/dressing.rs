use adiabat::filter::Orientation;
use adiabat::linalg;
use adiabat::superadiabatic::{build_dressing, dressed_projector_and_rest, dressing_diagnostics, DEFAULT_NODES};
use rayon::prelude::*;

use super::{family, filter_spec, num, require_family, Check, Experiment, Outcome};
use crate::config::{require_nonempty, ExperimentConfig, ModelFamily};
use crate::error::CliResult;

/// Norms of the dressing `A_p`, cancellation residuals and the order of the
/// rest term `R_n(ε)`.
pub struct DressingDiagnostics;

impl Experiment for DressingDiagnostics {
    fn kind(&self) -> &'static str {
        "dressing-diagnostics"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_nonempty(&cfg.grid.orders, "orders", &mut errors);
        require_nonempty(&cfg.grid.epsilons, "epsilons", &mut errors);
        require_family(cfg, &[ModelFamily::Ising, ModelFamily::RotatingField], &mut errors);
        if cfg.grid.sites.len() != 1 {
            errors.push("dressing-diagnostics takes exactly one chain length in grid.sites".into());
        }
        if cfg.grid.count.is_some_and(|n| n < 3) {
            errors.push("grid.count (Chebyshev nodes) must be at least 3".into());
        }
        errors
    }

    fn uses_filter(&self) -> bool {
        true
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let fam = family(cfg, cfg.grid.sites[0])?;
        let filter = filter_spec(cfg, Orientation::Generator)?;
        let nodes = cfg.grid.count.unwrap_or(DEFAULT_NODES);
        let hash = cfg.hash();
        let mut out = Outcome::new(&["config_hash", "order", "epsilon", "metric", "value"]);
        let mut diagnostics = Vec::new();
        let mut ratios = Vec::new();
        for &order in &cfg.grid.orders {
            let seq = build_dressing(&fam, &filter, order, nodes)?;
            // sup over interior nodes: the endpoints are flat
            let sup = |e: f64| -> CliResult<f64> {
                let norms = (1..nodes - 1)
                    .into_par_iter()
                    .map(|j| Ok(linalg::spectral_norm(&dressed_projector_and_rest(&seq, e, j)?.rest)))
                    .collect::<CliResult<Vec<f64>>>()?;
                Ok(norms.into_iter().fold(0.0, f64::max))
            };
            let target = 2f64.powi(order as i32 + 1);
            for &eps in &cfg.grid.epsilons {
                let (full, half) = (sup(eps)?, sup(eps / 2.0)?);
                let ratio = full / half;
                out.row(vec![hash.clone(), order.to_string(), num(eps), "rest_sup".into(), num(full)]);
                out.row(vec![hash.clone(), order.to_string(), num(eps / 2.0), "rest_sup".into(), num(half)]);
                out.row(vec![hash.clone(), order.to_string(), num(eps), "rest_ratio".into(), num(ratio)]);
                if let Some(tol) = cfg.check("ratio_tolerance") {
                    out.checks.push(Check::at_most(
                        &format!("|ratio/{target} − 1| (n={order}, ε={eps})"),
                        (ratio / target - 1.0).abs(),
                        tol,
                    ));
                }
                ratios.push(serde_json::json!({"order": order, "epsilon": eps, "ratio": ratio, "target": target}));
            }
            // A_p does not depend on the truncation order, so the deepest
            // sequence carries every level
            if Some(&order) == cfg.grid.orders.iter().max() {
                diagnostics = dressing_diagnostics(&seq);
            }
        }
        for d in &diagnostics {
            for (metric, value) in [
                ("a_max_norm", d.max_norm),
                ("a_norm_start", d.norm_at_start),
                ("a_norm_end", d.norm_at_end),
                ("cancellation_residual", d.cancellation_residual),
            ] {
                out.row(vec![hash.clone(), d.order.to_string(), String::new(), metric.into(), num(value)]);
            }
            if let Some(max) = cfg.check("cancellation_max") {
                out.checks.push(Check::at_most(
                    &format!("cancellation residual of A_{}", d.order),
                    d.cancellation_residual,
                    max,
                ));
            }
        }
        out.note("rest_ratios", ratios);
        out.note("dressing", diagnostics);
        Ok(out)
    }
}
