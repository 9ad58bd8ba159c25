//! One-step unitary propagators for `iψ' = κ·H(x)ψ`, selectable by name.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, c, Matrix, Vector, I};

/// Advances `iψ' = κ·H(x)ψ` from `x` to `x + dx`.
pub trait Propagator: Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Convergence order in the step size.
    fn order(&self) -> u32;

    fn step(&self, h: &dyn Fn(f64) -> Matrix, x: f64, dx: f64, kappa: f64, psi: &Vector) -> Vector;
}

/// `ψ ← exp(−i·κ·dx·H(x + dx/2))ψ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpMidpoint;

impl Propagator for ExpMidpoint {
    fn name(&self) -> &str {
        "exp-midpoint"
    }

    fn order(&self) -> u32 {
        2
    }

    fn step(&self, h: &dyn Fn(f64) -> Matrix, x: f64, dx: f64, kappa: f64, psi: &Vector) -> Vector {
        linalg::unitary_exp(&h(x + 0.5 * dx), kappa * dx) * psi
    }
}

/// Fourth-order Magnus step from the two Gauss–Legendre nodes:
/// `H_eff = κ·dx·(H₁ + H₂)/2 + i(√3/12)(κ·dx)²[H₁, H₂]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Magnus4;

impl Propagator for Magnus4 {
    fn name(&self) -> &str {
        "magnus4"
    }

    fn order(&self) -> u32 {
        4
    }

    fn step(&self, h: &dyn Fn(f64) -> Matrix, x: f64, dx: f64, kappa: f64, psi: &Vector) -> Vector {
        let offset = 3f64.sqrt() / 6.0;
        let h1 = h(x + (0.5 - offset) * dx);
        let h2 = h(x + (0.5 + offset) * dx);
        let scaled = kappa * dx;
        let comm = linalg::commutator(&h1, &h2);
        let heff = (&h1 + &h2) * c(0.5 * scaled) + comm * (I * (3f64.sqrt() / 12.0 * scaled * scaled));
        linalg::unitary_exp(&linalg::hermitize(&heff), 1.0) * psi
    }
}

pub const DEFAULT_PROPAGATOR: &str = "exp-midpoint";

#[derive(Debug, Clone)]
pub struct PropagatorRegistry {
    entries: BTreeMap<String, Arc<dyn Propagator>>,
}

impl Default for PropagatorRegistry {
    fn default() -> Self {
        let mut reg = PropagatorRegistry {
            entries: BTreeMap::new(),
        };
        reg.register(Arc::new(ExpMidpoint));
        reg.register(Arc::new(Magnus4));
        reg
    }
}

impl PropagatorRegistry {
    pub fn register(&mut self, p: Arc<dyn Propagator>) {
        self.entries.insert(p.name().to_string(), p);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Propagator>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown propagator `{name}` (known: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
