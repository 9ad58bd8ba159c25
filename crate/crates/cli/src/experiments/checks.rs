//! Kinds for the structural identities of the quasi-adiabatic maps.

use adiabat::filter::{FilterFunction, Orientation};
use adiabat::linalg::{self, c, Matrix, C64, I};
use adiabat::operators::{Chain, InteractionPotential, LocalOperator};
use adiabat::quasiadiabatic::{
    family_generator, frequency_restricted, liouvillian, quasi_local_inverse, quasiadiabatic_transport,
    transport_fidelity, transport_overlap_real, LiouvillianContext, Path,
};
use adiabat::spectral::{self, parallel_transport_kato, uniform_grid, ProjectorDerivative};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{family, filter_spec, num, require_family, Check, Experiment, Outcome, PreflightModel};
use crate::config::{require_nonempty, ExperimentConfig, ModelFamily};
use crate::error::CliResult;

const DEFAULT_SAMPLES: usize = 20;
const DEFAULT_SEED: u64 = 20;
const DEFAULT_TRANSPORT_STEPS: usize = 400;
/// Random three-site Hamiltonians are redrawn until their gap reaches this.
const MIN_RANDOM_GAP: f64 = 0.5;

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = Matrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    linalg::hermitize(&m)
}

fn random_gapped_three_site(rng: &mut ChaCha8Rng) -> CliResult<Matrix> {
    let chain = Chain::spin_half(3)?;
    loop {
        let mut terms = Vec::new();
        for x in 0..2 {
            terms.push(LocalOperator::new(vec![x, x + 1], random_hermitian(rng, 4) * c(0.5), 2)?);
        }
        for x in 0..3 {
            terms.push(LocalOperator::site(x, random_hermitian(rng, 2))?);
        }
        let h = InteractionPotential::new(chain, terms)?.assemble()?.into_matrix();
        if spectral::diagonalize_matrix(&h).gap() >= MIN_RANDOM_GAP {
            return Ok(h);
        }
    }
}

/// `−i[H, I(Q_{≥γ}A)] = Q_{≥γ}A` on random gapped three-site problems,
/// by the spectral and the time-domain routes.
pub struct LiouvillianIdentity;

impl Experiment for LiouvillianIdentity {
    fn kind(&self) -> &'static str {
        "liouvillian-identity"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_family(cfg, &[ModelFamily::RandomLocal], &mut errors);
        if cfg.grid.count == Some(0) {
            errors.push("grid.count must be at least 1".into());
        }
        errors
    }

    fn uses_filter(&self) -> bool {
        true
    }

    /// Problems are drawn with gap at least 0.5; the filter check compares
    /// against that guaranteed gap.
    fn preflight_models(&self, _cfg: &ExperimentConfig) -> CliResult<Vec<PreflightModel>> {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        let h = random_gapped_three_site(&mut rng)?;
        let scale = MIN_RANDOM_GAP / spectral::diagonalize_matrix(&h).gap();
        let h = h * c(scale);
        Ok(vec![PreflightModel::fixed("random three-site (gap floor)", h)])
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let spec = filter_spec(cfg, Orientation::Inverse)?;
        let f = FilterFunction::synthesize(&spec, cfg.filter.truncation, cfg.filter.samples)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.grid.seed.unwrap_or(DEFAULT_SEED));
        let hash = cfg.hash();
        let mut out = Outcome::new(&["config_hash", "sample", "path", "defect"]);
        let (mut spectral_worst, mut time_worst) = (0.0_f64, 0.0_f64);
        for k in 0..cfg.grid.count.unwrap_or(DEFAULT_SAMPLES) {
            let h = random_gapped_three_site(&mut rng)?;
            let a = random_hermitian(&mut rng, 8);
            let ctx = LiouvillianContext::from_hamiltonian(&h, spec.clone())?;
            let norm = linalg::spectral_norm(&a);
            let restricted = frequency_restricted(ctx.spectral(), &a, spec.gamma());
            for (path, route) in [("spectral", Path::Spectral), ("time-domain", Path::TimeDomain(&f))] {
                let inv = quasi_local_inverse(&ctx, &restricted, route)?;
                let defect = linalg::spectral_norm(&(liouvillian(&ctx, &inv) - &restricted)) / norm;
                if path == "spectral" {
                    spectral_worst = spectral_worst.max(defect);
                } else {
                    time_worst = time_worst.max(defect);
                }
                out.row(vec![hash.clone(), k.to_string(), path.into(), num(defect)]);
            }
        }
        if let Some(max) = cfg.check("spectral_max") {
            out.checks.push(Check::at_most("spectral defect", spectral_worst, max));
        }
        if let Some(max) = cfg.check("time_domain_max") {
            out.checks.push(Check::at_most("time-domain defect", time_worst, max));
        }
        out.note("max_defect", serde_json::json!({"spectral": spectral_worst, "time_domain": time_worst}));
        Ok(out)
    }
}

/// `Ṗ = −i[G, P]` along a driven family.
pub struct GeneratorEquation;

impl Experiment for GeneratorEquation {
    fn kind(&self) -> &'static str {
        "generator-equation"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_nonempty(&cfg.grid.sites, "sites", &mut errors);
        require_nonempty(&cfg.grid.s_points, "s_points", &mut errors);
        require_family(cfg, &[ModelFamily::Ising, ModelFamily::RotatingField], &mut errors);
        errors
    }

    fn uses_filter(&self) -> bool {
        true
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let filter = filter_spec(cfg, Orientation::Generator)?;
        let hash = cfg.hash();
        let mut out = Outcome::new(&["config_hash", "sites", "s", "residual"]);
        let mut worst = 0.0_f64;
        for &n in &cfg.grid.sites {
            let fam = family(cfg, n)?;
            for &s in &cfg.grid.s_points {
                let g = family_generator(&fam, s, &filter)?;
                let p = spectral::family_ground_projector(&fam, s)?;
                let pdot = spectral::projector_derivative(&fam, s, ProjectorDerivative::default())?;
                let r = linalg::spectral_norm(&(pdot + linalg::commutator(&g, p.matrix()) * I));
                worst = worst.max(r);
                out.row(vec![hash.clone(), n.to_string(), num(s), num(r)]);
            }
        }
        if let Some(max) = cfg.check("residual_max") {
            out.checks.push(Check::at_most("max ‖Ṗ + i[G, P]‖", worst, max));
        }
        out.note("max_residual", worst);
        Ok(out)
    }
}

/// Kato parallel transport against the quasi-adiabatic flow of the ground
/// state.
pub struct TransportAgreement;

impl Experiment for TransportAgreement {
    fn kind(&self) -> &'static str {
        "transport-agreement"
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Vec<String> {
        let mut errors = Vec::new();
        require_nonempty(&cfg.grid.sites, "sites", &mut errors);
        require_family(cfg, &[ModelFamily::Ising, ModelFamily::RotatingField], &mut errors);
        if cfg.grid.count.is_some_and(|n| n < 2) {
            errors.push("grid.count (transport steps) must be at least 2".into());
        }
        errors
    }

    fn uses_filter(&self) -> bool {
        true
    }

    fn run(&self, cfg: &ExperimentConfig) -> CliResult<Outcome> {
        let filter = filter_spec(cfg, Orientation::Generator)?;
        let grid = uniform_grid(0.0, 1.0, cfg.grid.count.unwrap_or(DEFAULT_TRANSPORT_STEPS));
        let hash = cfg.hash();
        let mut out = Outcome::new(&["config_hash", "sites", "metric", "value"]);
        let mut summary = Vec::new();
        for &n in &cfg.grid.sites {
            let fam = family(cfg, n)?;
            let omega0 = spectral::family_spectrum(&fam, 0.0)?.vectors().column(0).into_owned();
            let kato = parallel_transport_kato(&fam, &grid, &omega0, ProjectorDerivative::default())?;
            let qa = quasiadiabatic_transport(&fam, &grid, &omega0, &filter)?;
            let infidelity = 1.0 - transport_fidelity(&kato, &qa);
            let phase_defect = 1.0 - transport_overlap_real(&kato, &qa);
            let residual = kato.parallel_residual.max(qa.parallel_residual);
            for (metric, value) in [
                ("infidelity", infidelity),
                ("phase_defect", phase_defect),
                ("parallel_residual", residual),
                ("leakage", kato.leakage.max(qa.leakage)),
            ] {
                out.row(vec![hash.clone(), n.to_string(), metric.into(), num(value)]);
            }
            if let Some(max) = cfg.check("infidelity_max") {
                out.checks.push(Check::at_most(&format!("1 − F (L={n})"), infidelity, max));
                out.checks.push(Check::at_most(&format!("1 − Re⟨Ω_K, Ω_QA⟩ (L={n})"), phase_defect, max));
            }
            if let Some(max) = cfg.check("parallel_residual_max") {
                out.checks.push(Check::at_most(&format!("‖PΩ̇‖ (L={n})"), residual, max));
            }
            summary.push(serde_json::json!({
                "sites": n, "infidelity": infidelity, "phase_defect": phase_defect, "parallel_residual": residual,
            }));
        }
        out.note("transport", summary);
        Ok(out)
    }
}
