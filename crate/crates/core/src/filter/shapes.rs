//! Bump shapes `φ` on the reduced frequency `x = ω/γ`, and the registry
//! that lets configurations select them by name.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An even function with `φ(0) = 1`, `0 ≤ φ ≤ 1`, vanishing for `|x| ≥ 1`
/// and with `1 − φ(x) = O(x²)` at the origin.
pub trait BumpShape: Debug + Send + Sync {
    fn name(&self) -> &str;

    fn phi(&self, x: f64) -> f64;

    /// `1 − φ(x)`, overridden where cancellation near `x = 0` matters.
    fn one_minus_phi(&self, x: f64) -> f64 {
        1.0 - self.phi(x)
    }
}

/// `φ(x) = exp(a·(1 − 1/(1 − x²))) = exp(−a x²/(1 − x²))`.
///
/// Larger `a` narrows the bump in frequency and widens the region where
/// the multiplier is analytic, which makes `W` decay faster at moderate
/// times.
#[derive(Debug, Clone)]
pub struct ExpBump {
    name: String,
    pub sharpness: f64,
}

impl ExpBump {
    pub fn new(name: impl Into<String>, sharpness: f64) -> Result<Self> {
        if !(sharpness > 0.0 && sharpness.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bump sharpness must be positive, got {sharpness}"
            )));
        }
        Ok(ExpBump {
            name: name.into(),
            sharpness,
        })
    }

    fn exponent(&self, x: f64) -> Option<f64> {
        let x2 = x * x;
        (x2 < 1.0).then(|| -self.sharpness * x2 / (1.0 - x2))
    }
}

impl BumpShape for ExpBump {
    fn name(&self) -> &str {
        &self.name
    }

    fn phi(&self, x: f64) -> f64 {
        self.exponent(x).map_or(0.0, f64::exp)
    }

    fn one_minus_phi(&self, x: f64) -> f64 {
        self.exponent(x).map_or(1.0, |e| -e.exp_m1())
    }
}

/// `φ(x) = 1 − S(|x|)` with the smooth step `S(t) = f(t)/(f(t) + f(1−t))`,
/// `f(t) = e^{−1/t}`. Flat to all orders at both `x = 0` and `|x| = 1`.
#[derive(Debug, Clone, Default)]
pub struct SmoothStep;

fn flat(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

impl SmoothStep {
    fn step(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            let a = flat(t);
            a / (a + flat(1.0 - t))
        }
    }
}

impl BumpShape for SmoothStep {
    fn name(&self) -> &str {
        "smooth-step"
    }

    fn phi(&self, x: f64) -> f64 {
        1.0 - SmoothStep::step(x.abs())
    }

    fn one_minus_phi(&self, x: f64) -> f64 {
        SmoothStep::step(x.abs())
    }
}

pub const DEFAULT_SHAPE: &str = "exp-bump";
pub const DEFAULT_SHARPNESS: f64 = 8.0;

/// Named bump shapes selectable at runtime.
#[derive(Debug, Clone)]
pub struct ShapeRegistry {
    shapes: BTreeMap<String, Arc<dyn BumpShape>>,
}

impl Default for ShapeRegistry {
    /// `exp-bump` (sharpness 8), `exp-bump-unit` (sharpness 1) and
    /// `smooth-step`.
    fn default() -> Self {
        let mut reg = ShapeRegistry {
            shapes: BTreeMap::new(),
        };
        reg.register(Arc::new(
            ExpBump::new(DEFAULT_SHAPE, DEFAULT_SHARPNESS).expect("positive sharpness"),
        ));
        reg.register(Arc::new(
            ExpBump::new("exp-bump-unit", 1.0).expect("positive sharpness"),
        ));
        reg.register(Arc::new(SmoothStep));
        reg
    }
}

impl ShapeRegistry {
    pub fn register(&mut self, shape: Arc<dyn BumpShape>) {
        self.shapes.insert(shape.name().to_string(), shape);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn BumpShape>> {
        self.shapes.get(name).cloned().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown bump shape `{name}` (known: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.shapes.keys().map(String::as_str).collect()
    }
}
