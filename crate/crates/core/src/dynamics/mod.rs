//! Slowly driven Schrödinger dynamics `iεψ' = H_sψ`, Heisenberg evolution,
//! Lieb–Robinson cones and the orthogonality-catastrophe experiment.

mod catastrophe;
mod lieb_robinson;
mod propagators;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::models::HamiltonianFamily;

pub use catastrophe::{catastrophe_experiment, CatastropheRow, CatastropheTable};
pub use lieb_robinson::{fit_cone, lieb_robinson_profile, ConeFit, ConePoint, ConeTable, ConeWindow};
pub use propagators::{ExpMidpoint, Magnus4, Propagator, PropagatorRegistry, DEFAULT_PROPAGATOR};

/// `Δs = step_factor·ε/‖H‖` by default.
pub const DEFAULT_STEP_FACTOR: f64 = 0.25;
pub const DEFAULT_MAX_STEPS: usize = 4_000_000;
const DRIFT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PropagationOptions {
    pub propagator: Arc<dyn Propagator>,
    pub step_factor: f64,
    /// Overrides the step derived from `step_factor`.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions {
            propagator: Arc::new(ExpMidpoint),
            step_factor: DEFAULT_STEP_FACTOR,
            max_step: None,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl PropagationOptions {
    pub fn with_propagator(propagator: Arc<dyn Propagator>) -> Self {
        PropagationOptions {
            propagator,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub epsilon: f64,
    pub grid: Vec<f64>,
    pub states: Vec<Vector>,
    pub steps: usize,
    pub max_norm_drift: f64,
    pub propagator: String,
    pub warnings: Vec<String>,
}

impl PropagationResult {
    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("nonempty trajectory")
    }
}

/// `max_s ‖H_s‖` over a coarse probe of `[s₀, s₁]`.
fn norm_bound(fam: &HamiltonianFamily, s0: f64, s1: f64) -> f64 {
    (0..=8)
        .map(|j| {
            let s = s0 + (s1 - s0) * j as f64 / 8.0;
            linalg::normal_norm(&fam.hamiltonian_matrix(s))
        })
        .fold(0.0, f64::max)
}

/// Solves `iεψ'(s) = H_sψ(s)`, recording the state at each point of `grid`.
pub fn schrodinger_propagate(
    fam: &HamiltonianFamily,
    epsilon: f64,
    initial: &Vector,
    grid: &[f64],
    opts: &PropagationOptions,
) -> Result<PropagationResult> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("ε must be positive, got {epsilon}")));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "record grid must be nonempty and nondecreasing".into(),
        ));
    }
    if initial.len() != fam.dim() {
        return Err(Error::DimensionMismatch {
            expected: fam.dim(),
            found: initial.len(),
        });
    }
    if (initial.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "initial state must be normalized, ‖ψ₀‖ = {}",
            initial.norm()
        )));
    }
    let h_norm = norm_bound(fam, grid[0], *grid.last().unwrap()).max(f64::MIN_POSITIVE);
    let ds = opts
        .max_step
        .unwrap_or(opts.step_factor * epsilon / h_norm);
    let mut warnings = Vec::new();
    if ds * h_norm / epsilon > 1.0 {
        warnings.push(format!(
            "step Δs = {ds:.3e} resolves less than one phase oscillation (Δs‖H‖/ε = {:.2})",
            ds * h_norm / epsilon
        ));
    }
    let span = grid.last().unwrap() - grid[0];
    let budget = (span / ds).ceil() as usize + grid.len();
    if budget > opts.max_steps {
        return Err(Error::Accuracy(format!(
            "propagation needs about {budget} steps, above the budget of {}",
            opts.max_steps
        )));
    }

    let h = |s: f64| fam.hamiltonian_matrix(s);
    let kappa = 1.0 / epsilon;
    let mut psi = initial.clone();
    let mut states = vec![psi.clone()];
    let mut steps = 0;
    let mut drift = 0.0_f64;
    for w in grid.windows(2) {
        let interval = w[1] - w[0];
        if interval == 0.0 {
            states.push(psi.clone());
            continue;
        }
        let n = (interval / ds).ceil().max(1.0) as usize;
        let dx = interval / n as f64;
        for j in 0..n {
            psi = opts.propagator.step(&h, w[0] + j as f64 * dx, dx, kappa, &psi);
        }
        steps += n;
        drift = drift.max((psi.norm() - 1.0).abs());
        states.push(psi.clone());
    }
    if drift > DRIFT_LIMIT {
        return Err(Error::Accuracy(format!(
            "norm drift {drift:.3e} exceeds {DRIFT_LIMIT:.0e}"
        )));
    }
    Ok(PropagationResult {
        epsilon,
        grid: grid.to_vec(),
        states,
        steps,
        max_norm_drift: drift,
        propagator: opts.propagator.name().to_string(),
        warnings,
    })
}

/// Integrates `iψ'(t) = H(t)ψ(t)` on `[t₀, t₁]` in `steps` equal steps.
pub fn evolve(
    h: &dyn Fn(f64) -> Matrix,
    t0: f64,
    t1: f64,
    initial: &Vector,
    steps: usize,
    propagator: &dyn Propagator,
) -> Result<Vector> {
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut psi = initial.clone();
    for j in 0..steps {
        psi = propagator.step(h, t0 + j as f64 * dt, dt, 1.0, &psi);
    }
    Ok(psi)
}

/// `e^{itH} A e^{−itH}`.
pub fn heisenberg_evolve(h: &Matrix, t: f64, a: &Matrix) -> Result<Matrix> {
    linalg::ensure_same_dim(h, a)?;
    if !linalg::is_hermitian(h, 1e-12) {
        return Err(Error::NotHermitian {
            deviation: linalg::hermiticity_defect(h),
        });
    }
    let u = linalg::unitary_exp(h, t);
    Ok(u.adjoint() * a * u)
}
