//! Global fidelity versus local accuracy for independent spins following a
//! rotating field.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::fit::{linear_fit, LinearFit};
use crate::linalg::{self, Matrix};
use crate::models::{rotating_field_chain, FieldPath};
use crate::operators::{embed, LocalOperator};
use crate::spectral;

use super::{schrodinger_propagate, PropagationOptions};

#[derive(Debug, Clone, Serialize)]
pub struct CatastropheRow {
    pub sites: usize,
    /// `|⟨ψ_ε(1), Ω₁⟩|`.
    pub fidelity: f64,
    pub log_fidelity: f64,
    /// `|⟨ψ_ε, Aψ_ε⟩ − ⟨Ω₁, AΩ₁⟩|` for the single-site observable.
    pub local_error: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatastropheTable {
    pub epsilon: f64,
    pub rows: Vec<CatastropheRow>,
    /// `log F` against the number of sites.
    pub log_fidelity_fit: LinearFit,
    /// `(max − min)/max` of the local errors.
    pub local_error_spread: f64,
}

/// Runs `iεψ' = H_sψ` from the ground state of `H₀` for each chain length
/// and compares with the ground state of `H₁`. `observable` acts on site 0.
pub fn catastrophe_experiment(
    epsilon: f64,
    sites: &[usize],
    path: &FieldPath,
    observable: &Matrix,
    opts: &PropagationOptions,
) -> Result<CatastropheTable> {
    let rows: Vec<CatastropheRow> = sites
        .par_iter()
        .map(|&n| {
            let fam = rotating_field_chain(n, path.clone())?;
            let start = spectral::family_spectrum(&fam, 0.0)?;
            let end = spectral::family_spectrum(&fam, 1.0)?;
            let psi0 = start.vectors().column(0).into_owned();
            let omega1 = end.vectors().column(0).into_owned();
            let run = schrodinger_propagate(&fam, epsilon, &psi0, &[0.0, 1.0], opts)?;
            let psi = run.final_state();
            let a = embed(&LocalOperator::site(0, observable.clone())?, fam.chain())?.into_matrix();
            let local_error =
                (linalg::expectation(psi, &a) - linalg::expectation(&omega1, &a)).norm();
            let fidelity = omega1.dotc(psi).norm();
            Ok(CatastropheRow {
                sites: n,
                fidelity,
                log_fidelity: fidelity.ln(),
                local_error,
                steps: run.steps,
            })
        })
        .collect::<Result<_>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.sites as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log_fidelity).collect();
    let log_fidelity_fit = linear_fit(&x, &y)?;
    let max = rows.iter().map(|r| r.local_error).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.local_error).fold(f64::INFINITY, f64::min);
    Ok(CatastropheTable {
        epsilon,
        rows,
        log_fidelity_fit,
        local_error_spread: if max > 0.0 { (max - min) / max } else { 0.0 },
    })
}
