//! Commutator cones `‖[τ_t(A), B]‖` and their exponential fit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::linalg::{self, Matrix};
use crate::operators::{embed, Chain, LocalOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConePoint {
    pub time: f64,
    pub distance: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeTable {
    pub points: Vec<ConePoint>,
    /// `2‖A‖‖B‖`, the trivial bound.
    pub saturation_bound: f64,
}

/// `‖[e^{itH}Ae^{−itH}, B_d]‖` where `B_d` is the single-site operator `b`
/// placed `d` sites to the right of the last site of `A`'s support.
pub fn lieb_robinson_profile(
    h: &Matrix,
    chain: &Chain,
    a: &LocalOperator,
    b: &Matrix,
    distances: &[usize],
    times: &[f64],
) -> Result<ConeTable> {
    let anchor = *a
        .support()
        .last()
        .ok_or_else(|| Error::Domain("A needs a nonempty support".into()))?;
    let placed: Vec<(usize, Matrix)> = distances
        .iter()
        .map(|&d| {
            if d == 0 {
                return Err(Error::Domain("A and B must have disjoint supports".into()));
            }
            let op = LocalOperator::new(vec![anchor + d], b.clone(), chain.local_dim())?;
            Ok((d, embed(&op, chain)?.into_matrix()))
        })
        .collect::<Result<_>>()?;
    let a_full = embed(a, chain)?.into_matrix();
    let eig = linalg::eigh(h);
    let u = &eig.vectors;
    let a_eig = u.adjoint() * &a_full * u;
    let bound = 2.0 * linalg::spectral_norm(a.matrix()) * linalg::spectral_norm(b);
    // commutators of hermitian operators are anti-hermitian, so eigenvalues
    // give the norm without an SVD
    let hermitian = a.is_hermitian() && linalg::is_hermitian(b, 1e-12);
    let norm = |m: &Matrix| {
        if hermitian {
            linalg::normal_norm(m)
        } else {
            linalg::spectral_norm(m)
        }
    };

    let rows: Vec<Vec<ConePoint>> = times
        .par_iter()
        .map(|&t| {
            let at = if t == 0.0 {
                a_full.clone()
            } else {
                let n = eig.values.len();
                let rotated = Matrix::from_fn(n, n, |k, l| {
                    a_eig[(k, l)] * linalg::C64::from_polar(1.0, t * (eig.values[k] - eig.values[l]))
                });
                u * rotated * u.adjoint()
            };
            placed
                .iter()
                .map(|(d, bd)| ConePoint {
                    time: t,
                    distance: *d,
                    value: norm(&linalg::commutator(&at, bd)),
                })
                .collect()
        })
        .collect();
    Ok(ConeTable {
        points: rows.into_iter().flatten().collect(),
        saturation_bound: bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeFit {
    /// Spatial decay rate `μ` of `C·exp(−μ(d − v t))`.
    pub mu: f64,
    pub velocity: f64,
    pub prefactor: f64,
    /// `‖log y − fit‖ / ‖log y − mean‖`.
    pub relative_residual: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// The sub-saturation region used by [`fit_cone`]. Values are kept when
/// `floor·bound ≤ value ≤ saturation·bound`; `floor` excludes the
/// polynomial precursor `∝ t^d` ahead of the front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeWindow {
    pub floor: f64,
    pub saturation: f64,
    pub min_distance: usize,
    pub max_time: f64,
}

impl Default for ConeWindow {
    fn default() -> Self {
        ConeWindow {
            floor: 0.03,
            saturation: 0.25,
            min_distance: 2,
            max_time: 1.5,
        }
    }
}

/// Fits `log ‖[τ_t(A), B_d]‖ = log C − μd + μvt` over the window.
pub fn fit_cone(table: &ConeTable, window: &ConeWindow) -> Result<ConeFit> {
    if !(window.floor > 0.0 && window.floor < window.saturation) {
        return Err(Error::InvalidParameter(format!(
            "cone window needs 0 < floor < saturation, got {} and {}",
            window.floor, window.saturation
        )));
    }
    let lo = window.floor * table.saturation_bound;
    let hi = window.saturation * table.saturation_bound;
    let used: Vec<&ConePoint> = table
        .points
        .iter()
        .filter(|p| {
            p.time > 0.0
                && p.time <= window.max_time
                && p.distance >= window.min_distance
                && p.value >= lo
                && p.value <= hi
        })
        .collect();
    let design: Vec<Vec<f64>> = used
        .iter()
        .map(|p| vec![1.0, p.distance as f64, p.time])
        .collect();
    let y: Vec<f64> = used.iter().map(|p| p.value.ln()).collect();
    let fit = least_squares(&design, &y)?;
    let mu = -fit.coefficients[1];
    let velocity = fit.coefficients[2] / mu;
    Ok(ConeFit {
        mu,
        velocity,
        prefactor: fit.coefficients[0].exp(),
        relative_residual: fit.relative_residual,
        r_squared: fit.r_squared,
        points_used: used.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z};
    use crate::models::{driven_ising_chain, rotating_field_chain, FieldPath, IsingParams, SwitchFunction};
    use std::sync::Arc;

    #[test]
    fn zero_at_time_zero_and_without_interactions() {
        let fam = rotating_field_chain(4, FieldPath::fixed([0.6, 0.0, 0.8])).unwrap();
        let h = fam.hamiltonian_matrix(0.0);
        let a = LocalOperator::site(0, pauli_z()).unwrap();
        let table =
            lieb_robinson_profile(&h, fam.chain(), &a, &pauli_z(), &[1, 2, 3], &[0.0, 0.5, 2.0]).unwrap();
        assert!(table.points.iter().all(|p| p.value < 1e-13));
    }

    #[test]
    fn rejects_overlapping_supports() {
        let fam = rotating_field_chain(2, FieldPath::fixed([0.0, 0.0, 1.0])).unwrap();
        let a = LocalOperator::site(0, pauli_z()).unwrap();
        let err = lieb_robinson_profile(&fam.hamiltonian_matrix(0.0), fam.chain(), &a, &pauli_z(), &[0], &[1.0]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn ising_cone_grows_and_saturates_below_bound() {
        let fam = driven_ising_chain(
            6,
            IsingParams::transverse(1.0, 1.0, 0.0),
            Arc::new(SwitchFunction::default()),
        )
        .unwrap();
        let h = fam.hamiltonian_matrix(0.0);
        let a = LocalOperator::site(0, pauli_x()).unwrap();
        let times: Vec<f64> = (0..=20).map(|j| 0.25 * j as f64).collect();
        let table = lieb_robinson_profile(&h, fam.chain(), &a, &pauli_x(), &[3], &times).unwrap();
        assert!(table.points.iter().all(|p| p.value <= table.saturation_bound + 1e-12));
        assert!(table.points[0].value < 1e-14);
        // monotone at early times
        let early: Vec<f64> = table.points.iter().take(6).map(|p| p.value).collect();
        assert!(early.windows(2).all(|w| w[1] >= w[0]), "{early:?}");
    }

    #[test]
    fn fit_recovers_synthetic_cone() {
        let (mu, v) = (1.3, 2.1);
        let mut points = Vec::new();
        for d in 1..8 {
            for j in 1..40 {
                let t = 0.05 * j as f64;
                points.push(ConePoint {
                    time: t,
                    distance: d,
                    value: 0.2 * (-mu * (d as f64 - v * t)).exp(),
                });
            }
        }
        let table = ConeTable {
            points,
            saturation_bound: 2.0,
        };
        let window = ConeWindow {
            floor: 1e-6,
            saturation: 0.5,
            min_distance: 1,
            max_time: 10.0,
        };
        let fit = fit_cone(&table, &window).unwrap();
        assert!((fit.mu - mu).abs() < 1e-10);
        assert!((fit.velocity - v).abs() < 1e-10);
        assert!(fit.relative_residual < 1e-10);
        let bad = ConeWindow {
            floor: 0.5,
            saturation: 0.1,
            ..window
        };
        assert!(fit_cone(&table, &bad).is_err());
    }
}
