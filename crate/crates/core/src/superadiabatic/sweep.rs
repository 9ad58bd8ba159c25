//! Diabatic error `|⟨ψ_ε(s), Aψ_ε(s)⟩ − Tr(P_s A)|` as a function of ε.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{schrodinger_propagate, PropagationOptions};
use crate::error::{Error, Result};
use crate::fit::{log_log_fit, LinearFit};
use crate::linalg::{self, Matrix};
use crate::models::HamiltonianFamily;
use crate::spectral;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub s: f64,
    pub error: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFit {
    pub s: f64,
    pub fit: LinearFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Log-log fit of error against ε at each recorded `s`.
    pub fits: Vec<SweepFit>,
}

impl SweepTable {
    pub fn slope_at(&self, s: f64) -> Option<f64> {
        self.fits
            .iter()
            .find(|f| (f.s - s).abs() < 1e-12)
            .map(|f| f.fit.slope)
    }

    pub fn error_at(&self, epsilon: f64, s: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| (r.epsilon - epsilon).abs() < 1e-15 && (r.s - s).abs() < 1e-12)
            .map(|r| r.error)
    }
}

/// Starts from the ground state of `H₀` at every ε and records the error
/// of the observable at each of `s_points`. The reference is the ground
/// patch expectation, which fixes `⟨Ω_s, AΩ_s⟩` independently of gauge.
pub fn diabatic_error_sweep(
    fam: &HamiltonianFamily,
    observable: &Matrix,
    epsilons: &[f64],
    s_points: &[f64],
    opts: &PropagationOptions,
) -> Result<SweepTable> {
    if s_points.is_empty() || s_points.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::InvalidParameter("s points must lie in [0, 1]".into()));
    }
    let start = spectral::family_spectrum(fam, 0.0)?;
    let psi0 = start.vectors().column(0).into_owned();
    let mut grid = vec![0.0];
    grid.extend_from_slice(s_points);
    let references: Vec<f64> = s_points
        .iter()
        .map(|&s| {
            let p = spectral::family_ground_projector(fam, s)?;
            Ok(linalg::trace(&(p.matrix() * observable)).re)
        })
        .collect::<Result<_>>()?;
    let per_eps: Vec<Vec<SweepRow>> = epsilons
        .par_iter()
        .map(|&eps| {
            let run = schrodinger_propagate(fam, eps, &psi0, &grid, opts)?;
            Ok(s_points
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let value = linalg::expectation(&run.states[i + 1], observable).re;
                    SweepRow {
                        epsilon: eps,
                        s,
                        error: (value - references[i]).abs(),
                        steps: run.steps,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = per_eps.into_iter().flatten().collect();
    let fits = if epsilons.len() >= 2 {
        s_points
            .iter()
            .map(|&s| {
                let (x, y): (Vec<f64>, Vec<f64>) = rows
                    .iter()
                    .filter(|r| r.s == s)
                    .map(|r| (r.epsilon, r.error.max(f64::MIN_POSITIVE)))
                    .unzip();
                Ok(SweepFit {
                    s,
                    fit: log_log_fit(&x, &y)?,
                })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(SweepTable { rows, fits })
}
