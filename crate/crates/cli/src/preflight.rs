//! Physics checks that run before any experiment: memory, spectral gap
//! along the path, and the filter width against the gap.

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::experiments::Experiment;

/// Path points at which the gap is inspected.
pub const GAP_POINTS: [f64; 3] = [0.0, 0.5, 1.0];
/// Gaps below this are treated as closed.
pub const GAP_FLOOR: f64 = 1e-6;
/// Dense complex matrices held at once by the heaviest kernels
/// (Hamiltonian, eigenvectors, one operator and one workspace).
pub const RESIDENT_MATRICES: f64 = 4.0;
const BYTES_PER_ENTRY: f64 = 16.0;
const GIB: f64 = (1u64 << 30) as f64;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Failure {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRecord {
    pub model: String,
    pub s: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PreflightReport {
    pub kind: String,
    pub config_hash: String,
    pub memory_gib: f64,
    pub gaps: Vec<GapRecord>,
    pub failures: Vec<Failure>,
}

impl PreflightReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Estimated peak bytes for exact diagonalization at Hilbert dimension `dim`.
pub fn memory_estimate_bytes(dim: usize) -> f64 {
    RESIDENT_MATRICES * (dim as f64).powi(2) * BYTES_PER_ENTRY
}

/// Runs every preflight check; failures are collected rather than raised.
/// Models over the memory cap are not diagonalized.
pub fn preflight(exp: &dyn Experiment, cfg: &ExperimentConfig) -> CliResult<PreflightReport> {
    let models = exp.preflight_models(cfg)?;
    let cap = cfg.limits.memory_cap_gib;
    let mut failures = Vec::new();
    let mut gaps = Vec::new();
    let mut memory_gib = 0.0_f64;
    for m in models {
        let need = memory_estimate_bytes(m.dim) / GIB;
        memory_gib = memory_gib.max(need);
        if need > cap {
            failures.push(Failure {
                name: "memory".into(),
                message: format!("{}: dimension {} needs ~{need:.1} GiB, cap is {cap} GiB", m.label, m.dim),
            });
            continue;
        }
        let h = (m.build)()?;
        for s in GAP_POINTS {
            let gap = adiabat::spectral::diagonalize_matrix(&h(s)).gap();
            gaps.push(GapRecord {
                model: m.label.clone(),
                s,
                gap,
            });
            if gap < GAP_FLOOR {
                failures.push(Failure {
                    name: "gap".into(),
                    message: format!("{}: spectral gap {gap:.3e} at s = {s} is closed", m.label),
                });
            } else if exp.uses_filter() && cfg.filter.gamma > gap {
                failures.push(Failure {
                    name: "filter-gap".into(),
                    message: format!(
                        "{}: filter.gamma = {} exceeds the gap {gap:.4} at s = {s}",
                        m.label, cfg.filter.gamma
                    ),
                });
            }
        }
    }
    Ok(PreflightReport {
        kind: cfg.kind.clone(),
        config_hash: cfg.hash(),
        memory_gib,
        gaps,
        failures,
    })
}
