//! The weight `W` and its spectral multiplier `m(ω) = ∫ W(t) e^{iωt} dt`.
//!
//! The multiplier equals the inverse-frequency symbol outside `(−γ, γ)`,
//! interpolates smoothly through zero inside, and vanishes at `ω = 0`.
//! `W` itself is synthesized by splitting off the sign function, whose
//! transform is known in closed form:
//!
//! `W(t) = −sgn(t)/2 + (1/π) ∫₀^γ φ(ν/γ) sin(νt)/ν dν`
//!
//! so only a smooth, compactly supported integral is left to quadrature.

mod shapes;

use std::sync::Arc;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, I};
use crate::spectral::SpectralData;

pub use shapes::{BumpShape, ExpBump, ShapeRegistry, SmoothStep, DEFAULT_SHAPE, DEFAULT_SHARPNESS};

pub const DEFAULT_SAMPLES: usize = 1 << 14;
/// Truncation time in units of `1/γ`.
pub const DEFAULT_TRUNCATION: f64 = 40.0;
const SYNTHESIS_TOL: f64 = 1e-8;

/// Which identity the multiplier serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `m(ω) = −i(1 − φ)/ω`: the Hastings generator `G = m(ad)Ḣ`.
    Generator,
    /// `m(ω) = +i(1 − φ)/ω`: the quasi-local inverse `I` with
    /// `−i[H, I(A)] = A` on frequencies `|ω| ≥ γ`.
    Inverse,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Generator => 1.0,
            Orientation::Inverse => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterSpec {
    gamma: f64,
    shape: Arc<dyn BumpShape>,
    orientation: Orientation,
}

impl FilterSpec {
    pub fn new(gamma: f64, shape: Arc<dyn BumpShape>, orientation: Orientation) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "filter gap must be positive, got {gamma}"
            )));
        }
        Ok(FilterSpec {
            gamma,
            shape,
            orientation,
        })
    }

    /// Default shape from the built-in registry.
    pub fn with_default_shape(gamma: f64, orientation: Orientation) -> Result<Self> {
        FilterSpec::new(gamma, ShapeRegistry::default().get(DEFAULT_SHAPE)?, orientation)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn shape(&self) -> &Arc<dyn BumpShape> {
        &self.shape
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn reoriented(&self, orientation: Orientation) -> Self {
        FilterSpec {
            orientation,
            ..self.clone()
        }
    }

    /// The closed-form multiplier.
    pub fn multiplier(&self, omega: f64) -> C64 {
        if omega == 0.0 {
            return linalg::ZERO;
        }
        let x = omega / self.gamma;
        let value = self.shape.one_minus_phi(x) / omega;
        -I * (self.orientation.sign() * value)
    }
}

/// Closed-form multiplier of `spec`; fails on a nonpositive gap through
/// [`FilterSpec::new`].
pub fn make_multiplier(spec: &FilterSpec) -> impl Fn(f64) -> C64 + '_ {
    move |omega| spec.multiplier(omega)
}

/// `W` sampled on `t_j = −T + j·2T/n`, `j = 0..=n`, with trapezoid weights.
#[derive(Debug, Clone)]
pub struct FilterFunction {
    spec: FilterSpec,
    truncation: f64,
    times: Vec<f64>,
    samples: Vec<f64>,
    dt: f64,
}

fn smooth_part(spec: &FilterSpec, rule: &GaussLegendre, panels: usize, t: f64) -> f64 {
    let gamma = spec.gamma;
    let width = gamma / panels as f64;
    let shape = &spec.shape;
    (0..panels)
        .map(|p| {
            let lo = p as f64 * width;
            rule.integrate(lo, lo + width, |nu| {
                shape.phi(nu / gamma) * (nu * t).sin() / nu
            })
        })
        .sum::<f64>()
        / std::f64::consts::PI
}

impl FilterFunction {
    /// Synthesizes `W` at truncation `T` with `n` intervals; defaults to
    /// `T = 40/γ` and `n = 2¹⁴`.
    pub fn synthesize(spec: &FilterSpec, truncation: Option<f64>, samples: Option<usize>) -> Result<Self> {
        let truncation = truncation.unwrap_or(DEFAULT_TRUNCATION / spec.gamma);
        let n = samples.unwrap_or(DEFAULT_SAMPLES);
        if !(truncation > 0.0 && truncation.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "truncation time must be positive, got {truncation}"
            )));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "sample count must be even and ≥ 2, got {n}"
            )));
        }
        let dt = 2.0 * truncation / n as f64;
        let times: Vec<f64> = (0..=n).map(|j| -truncation + j as f64 * dt).collect();
        let half = n / 2;

        // the frequency integrand oscillates at most γT/π times over [0, γ]
        let panels = ((spec.gamma * truncation / 2.0).ceil() as usize).max(4);
        let rule = GaussLegendre::new(16).map_err(|e| Error::Accuracy(e.to_string()))?;
        let positive: Vec<f64> = times[half..]
            .par_iter()
            .map(|&t| smooth_part(spec, &rule, panels, t))
            .collect();
        let check: Vec<f64> = times[half..]
            .par_iter()
            .step_by(((half + 1) / 64).max(1))
            .map(|&t| smooth_part(spec, &rule, 2 * panels, t))
            .collect();
        let step = ((half + 1) / 64).max(1);
        let deviation = check
            .iter()
            .enumerate()
            .map(|(i, v)| (v - positive[i * step]).abs())
            .fold(0.0_f64, f64::max);
        if deviation > SYNTHESIS_TOL {
            return Err(Error::Accuracy(format!(
                "frequency quadrature unresolved: doubling nodes moves W by {deviation:.3e} (> {SYNTHESIS_TOL:.0e}); \
                 the bump `{}` is too rough for γT = {:.1}",
                spec.shape.name(),
                spec.gamma * truncation
            )));
        }

        let sign = spec.orientation.sign();
        let mut samples = vec![0.0; n + 1];
        for (i, smooth) in positive.iter().enumerate() {
            let j = half + i;
            let value = if i == 0 { 0.0 } else { sign * (smooth - 0.5) };
            samples[j] = value;
            samples[half - i] = -value;
        }
        Ok(FilterFunction {
            spec: spec.clone(),
            truncation,
            times,
            samples,
            dt,
        })
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn multiplier(&self, omega: f64) -> C64 {
        self.spec.multiplier(omega)
    }

    fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.times.len() {
            0.5 * self.dt
        } else {
            self.dt
        }
    }

    /// Size of the jump `W(0⁺) − W(0⁻)`.
    fn jump(&self) -> f64 {
        -self.spec.orientation.sign()
    }

    /// Trapezoid rule for `∫ W(t) e^{iωt} dt` over the grid, with the
    /// Euler–Maclaurin correction for the jump of `W` at the origin.
    pub fn quadrature_multiplier(&self, omega: f64) -> C64 {
        // W is odd, so the sum collapses to 2i Σ_{t>0} w W sin(ωt)
        let half = self.times.len() / 2;
        let sum: f64 = (half + 1..self.times.len())
            .map(|j| self.weight(j) * self.samples[j] * (omega * self.times[j]).sin())
            .sum();
        I * (2.0 * sum) + I * (omega * self.jump() * self.dt * self.dt / 12.0)
    }

    /// Time-domain action `Σ_j w_j W(t_j) e^{it_jH} A e^{−it_jH}` plus the
    /// jump correction, evaluated in the eigenbasis of `H`.
    pub fn apply_time_domain(&self, sd: &SpectralData, a: &linalg::Matrix) -> linalg::Matrix {
        let lambda = sd.values();
        let dim = sd.dim();
        let mut b = sd.to_eigenbasis(a);
        let factors: Vec<C64> = (0..dim * dim)
            .into_par_iter()
            .map(|idx| {
                let (k, l) = (idx / dim, idx % dim);
                self.quadrature_multiplier(lambda[k] - lambda[l])
            })
            .collect();
        for k in 0..dim {
            for l in 0..dim {
                b[(k, l)] *= factors[k * dim + l];
            }
        }
        sd.from_eigenbasis(&b)
    }

    /// `max |W(t)|` over `|t| > T/2`.
    pub fn tail_max(&self) -> f64 {
        self.tail_iter().map(|(_, w)| w.abs()).fold(0.0, f64::max)
    }

    /// `∫_{|t|>T/2} |W| dt` by the trapezoid rule.
    pub fn tail_mass(&self) -> f64 {
        self.tail_iter().map(|(j, w)| self.weight(j) * w.abs()).sum()
    }

    fn tail_iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let edge = 0.5 * self.truncation;
        self.times
            .iter()
            .zip(&self.samples)
            .enumerate()
            .filter(move |(_, (t, _))| t.abs() > edge)
            .map(|(j, (_, w))| (j, *w))
    }

    /// `max |W|` over `t` in `[lo, hi]`.
    pub fn window_max(&self, lo: f64, hi: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.samples)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .map(|(_, w)| w.abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FilterRow {
    pub omega: f64,
    pub exact_im: f64,
    pub quadrature_re: f64,
    pub quadrature_im: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FilterReport {
    pub shape: String,
    pub orientation: Orientation,
    pub gamma: f64,
    pub truncation: f64,
    pub samples: usize,
    pub rows: Vec<FilterRow>,
    pub max_error: f64,
    pub tail_max: f64,
    pub tail_mass: f64,
}

/// Compares quadrature and closed-form multipliers on `frequencies`.
pub fn verify_filter(f: &FilterFunction, frequencies: &[f64]) -> FilterReport {
    let rows: Vec<FilterRow> = frequencies
        .iter()
        .map(|&omega| {
            let exact = f.multiplier(omega);
            let quad = f.quadrature_multiplier(omega);
            FilterRow {
                omega,
                exact_im: exact.im,
                quadrature_re: quad.re,
                quadrature_im: quad.im,
                error: (quad - exact).norm(),
            }
        })
        .collect();
    FilterReport {
        shape: f.spec.shape.name().to_string(),
        orientation: f.spec.orientation,
        gamma: f.spec.gamma,
        truncation: f.truncation,
        samples: f.times.len() - 1,
        max_error: rows.iter().map(|r| r.error).fold(0.0, f64::max),
        rows,
        tail_max: f.tail_max(),
        tail_mass: f.tail_mass(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn generator(gamma: f64) -> FilterSpec {
        FilterSpec::with_default_shape(gamma, Orientation::Generator).unwrap()
    }

    #[test]
    fn multiplier_outside_gap_is_inverse_frequency() {
        let spec = generator(0.7);
        let m = spec.multiplier(1.4);
        assert_eq!(m.re, 0.0);
        assert_relative_eq!(m.im, -1.0 / 1.4, epsilon = 1e-15);
        assert_eq!(spec.multiplier(0.0), linalg::ZERO);
        for omega in [0.01, 0.3, 0.69, 2.0, 5.0] {
            assert_eq!(spec.multiplier(-omega), -spec.multiplier(omega));
        }
        let inv = spec.reoriented(Orientation::Inverse);
        assert_relative_eq!(inv.multiplier(1.4).im, 1.0 / 1.4, epsilon = 1e-15);
    }

    #[test]
    fn nonpositive_gap_is_a_domain_error() {
        assert!(matches!(
            FilterSpec::with_default_shape(0.0, Orientation::Generator),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn samples_are_odd_and_vanish_at_origin() {
        let f = FilterFunction::synthesize(&generator(1.0), Some(20.0), Some(2048)).unwrap();
        let w = f.samples();
        let n = w.len() - 1;
        assert_eq!(w[n / 2], 0.0);
        for j in 0..=n {
            assert!((w[j] + w[n - j]).abs() < 1e-15);
        }
        // W(0⁺) = −1/2 for the generator orientation
        assert_relative_eq!(w[n / 2 + 1], -0.5, epsilon = 1e-2);
    }

    #[test]
    fn resolution_identity_at_default_resolution() {
        let gamma = 0.8;
        let f = FilterFunction::synthesize(&generator(gamma), None, None).unwrap();
        let freqs = [-3.0 * gamma, -1.5 * gamma, 0.0, 1.5 * gamma, 2.0 * gamma, 3.0 * gamma];
        let report = verify_filter(&f, &freqs);
        assert!(report.max_error <= 1e-6, "{report:?}");
        assert_eq!(report.rows[2].error, 0.0);
    }

    #[test]
    fn tail_shrinks_when_truncation_doubles() {
        let spec = generator(1.0);
        let short = FilterFunction::synthesize(&spec, Some(20.0), Some(4096)).unwrap();
        let long = FilterFunction::synthesize(&spec, Some(40.0), Some(8192)).unwrap();
        assert!(long.tail_mass() < short.tail_mass());
        let t = long.truncation();
        assert!(long.window_max(t / 4.0, t / 2.0) < long.window_max(0.0, t / 4.0));
    }

    #[test]
    fn rough_shape_is_reported() {
        #[derive(Debug)]
        struct Box;
        impl BumpShape for Box {
            fn name(&self) -> &str {
                "box"
            }
            fn phi(&self, x: f64) -> f64 {
                if x.abs() < 0.37 { 1.0 } else { 0.0 }
            }
        }
        let spec = FilterSpec::new(1.0, Arc::new(Box), Orientation::Generator).unwrap();
        let err = FilterFunction::synthesize(&spec, None, Some(1024)).unwrap_err();
        assert!(matches!(err, Error::Accuracy(_)));
    }
}
