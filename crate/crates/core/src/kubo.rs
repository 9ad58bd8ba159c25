//! Linear response of a gapped ground state to `H_i + α e^{εt} V`.
//!
//! Four routes to the same coefficient `χ = d⟨J⟩/dα |_{α=0}`:
//! the quasi-adiabatic formula `−i⟨[I(V), J]⟩`, the static derivative
//! of the perturbed ground state, the ε-regularized Kubo sum with its
//! `ε → 0` extrapolation, and real-time switching dynamics.

use serde::Serialize;

use crate::dynamics::{evolve, Propagator};
use crate::error::{Error, Result};
use crate::filter::{FilterSpec, Orientation};
use crate::linalg::{self, c, Matrix, C64, I};
use crate::quasiadiabatic::{quasi_local_inverse, LiouvillianContext, Path};
use crate::spectral::{self, Projector, SpectralData, DEFAULT_CLUSTER_TOL};

pub const DEFAULT_EPSILONS: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];
pub const DEFAULT_ALPHA_STEP: f64 = 1e-3;
/// Switching horizon `T₀ = 14/ε`, so `e^{−εT₀} ≈ 8·10⁻⁷`.
pub const HORIZON_FACTOR: f64 = 14.0;
const SWITCH_TOL: f64 = 1e-6;

/// Gapped `H_i` with a perturbation `V` and an observable `J`.
#[derive(Debug, Clone)]
pub struct ResponseProblem {
    h: Matrix,
    v: Matrix,
    j: Matrix,
    sd: SpectralData,
    projector: Projector,
}

fn checked_hermitian(m: &Matrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    if !linalg::is_hermitian(m, 1e-12) {
        return Err(Error::NotHermitian {
            deviation: linalg::hermiticity_defect(m),
        });
    }
    Ok(())
}

impl ResponseProblem {
    pub fn new(h: Matrix, v: Matrix, j: Matrix) -> Result<Self> {
        let dim = h.nrows();
        checked_hermitian(&h, dim)?;
        checked_hermitian(&v, dim)?;
        checked_hermitian(&j, dim)?;
        let sd = spectral::diagonalize_matrix(&h);
        let delta = DEFAULT_CLUSTER_TOL * sd.norm().max(1.0);
        let projector = spectral::ground_projector(&sd, delta)?;
        let sd = sd.with_patch_rank(projector.rank())?;
        Ok(ResponseProblem {
            h,
            v,
            j,
            sd,
            projector,
        })
    }

    pub fn hamiltonian(&self) -> &Matrix {
        &self.h
    }

    pub fn perturbation(&self) -> &Matrix {
        &self.v
    }

    pub fn observable(&self) -> &Matrix {
        &self.j
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.sd
    }

    pub fn gap(&self) -> f64 {
        self.sd.gap()
    }

    /// `ϖ_i(X) = Tr(P_i X)/rank`.
    pub fn ground_expectation(&self, x: &Matrix) -> C64 {
        linalg::trace(&(self.projector.matrix() * x)) / c(self.projector.rank() as f64)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QaResponse {
    pub value: f64,
    /// Imaginary part discarded from `−i⟨[I(V), J]⟩`.
    pub imaginary_residue: f64,
}

/// `χ_QA = −i ϖ_i([I_i(V), J])` with the `+i/ω` orientation of `I`.
pub fn chi_quasiadiabatic(prob: &ResponseProblem, filter: &FilterSpec) -> Result<QaResponse> {
    let ctx = LiouvillianContext::new(
        prob.sd.clone(),
        filter.reoriented(Orientation::Inverse),
    )?;
    let inv = quasi_local_inverse(&ctx, &prob.v, Path::Spectral)?;
    let z = prob.ground_expectation(&linalg::commutator(&inv, &prob.j)) * (-I);
    Ok(QaResponse {
        value: z.re,
        imaginary_residue: z.im.abs(),
    })
}

fn perturbed_expectation(prob: &ResponseProblem, alpha: f64) -> Result<f64> {
    let h = &prob.h + &prob.v * c(alpha);
    let sd = spectral::diagonalize_matrix(&h);
    let delta = DEFAULT_CLUSTER_TOL * sd.norm().max(1.0);
    let p = spectral::ground_projector(&sd, delta)?;
    if p.rank() != prob.projector.rank() {
        return Err(Error::Gapless {
            gap: sd.gap(),
            threshold: delta,
        });
    }
    Ok((linalg::trace(&(p.matrix() * &prob.j)) / c(p.rank() as f64)).re)
}

/// `d⟨J⟩/dα` in the ground state of `H_i + αV`, from centered differences
/// at `±α₀` and `±α₀/2` combined by one Richardson step.
pub fn chi_static_oracle(prob: &ResponseProblem, alpha_step: f64) -> Result<f64> {
    if alpha_step.is_nan() || alpha_step <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "α step must be positive, got {alpha_step}"
        )));
    }
    let centered = |h: f64| -> Result<f64> {
        Ok((perturbed_expectation(prob, h)? - perturbed_expectation(prob, -h)?) / (2.0 * h))
    };
    let coarse = centered(alpha_step)?;
    let fine = centered(0.5 * alpha_step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `χ_ε = i Σ_{a∈P, k∉P} [V_ak J_ka/(ε − iω_ka) − J_ak V_ka/(ε + iω_ka)]`
/// with `ω_ka = λ_k − λ_a`: the switched Kubo integral in closed form,
/// after replacing `V` by its off-diagonal part (the diagonal blocks do not
/// contribute to the commutator expectation).
pub fn chi_kubo_at(prob: &ResponseProblem, epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Domain(format!("ε must be positive, got {epsilon}")));
    }
    let v = prob.sd.to_eigenbasis(&prob.v);
    let j = prob.sd.to_eigenbasis(&prob.j);
    let lambda = prob.sd.values();
    let rank = prob.projector.rank();
    let mut total = linalg::ZERO;
    for a in 0..rank {
        for k in rank..lambda.len() {
            let omega = lambda[k] - lambda[a];
            total += v[(a, k)] * j[(k, a)] / C64::new(epsilon, -omega)
                - j[(a, k)] * v[(k, a)] / C64::new(epsilon, omega);
        }
    }
    Ok((total * I / c(rank as f64)).re)
}

#[derive(Debug, Clone, Serialize)]
pub struct KuboTable {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated: f64,
    /// Difference between the two highest-order extrapolants.
    pub extrapolation_error: f64,
}

/// Polynomial extrapolation to `x = 0` by Neville's scheme; returns the
/// estimate and the change from the previous order.
pub fn neville_at_zero(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidParameter(
            "extrapolation needs matching, nonempty data".into(),
        ));
    }
    let n = x.len();
    let mut table = y.to_vec();
    let mut previous = table[n - 1];
    for m in 1..n {
        previous = table[n - m];
        for i in 0..n - m {
            let denom = x[i] - x[i + m];
            if denom == 0.0 {
                return Err(Error::InvalidParameter("repeated abscissae".into()));
            }
            table[i] = (x[i] * table[i + 1] - x[i + m] * table[i]) / denom;
        }
    }
    Ok((table[0], (table[0] - previous).abs()))
}

pub fn chi_kubo_regularized(prob: &ResponseProblem, epsilons: &[f64]) -> Result<KuboTable> {
    if epsilons.is_empty() {
        return Err(Error::InvalidParameter("ε list is empty".into()));
    }
    let values: Vec<f64> = epsilons
        .iter()
        .map(|&e| chi_kubo_at(prob, e))
        .collect::<Result<_>>()?;
    let (extrapolated, extrapolation_error) = neville_at_zero(epsilons, &values)?;
    Ok(KuboTable {
        epsilons: epsilons.to_vec(),
        values,
        extrapolated,
        extrapolation_error,
    })
}

/// `(⟨J⟩_{ψ(0)} − ϖ_i(J))/α` after switching on `αe^{εt}V` from
/// `t = −T₀`, starting in the ground state of `H_i`.
pub fn chi_dynamic(
    prob: &ResponseProblem,
    alpha: f64,
    epsilon: f64,
    horizon: Option<f64>,
    dt: f64,
    propagator: &dyn Propagator,
) -> Result<f64> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(
            "α must be nonzero: the response is a difference quotient".into(),
        ));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Domain(format!("ε must be positive, got {epsilon}")));
    }
    let t0 = horizon.unwrap_or(HORIZON_FACTOR / epsilon);
    let residual = (-epsilon * t0).exp();
    if residual > SWITCH_TOL {
        return Err(Error::InvalidParameter(format!(
            "horizon {t0} too short: switching factor e^(−εT₀) = {residual:.2e} > {SWITCH_TOL:.0e}"
        )));
    }
    if prob.projector.rank() != 1 {
        return Err(Error::InvalidParameter(
            "dynamic response needs a nondegenerate ground state".into(),
        ));
    }
    let psi0 = prob.sd.vectors().column(0).into_owned();
    let h = |t: f64| &prob.h + &prob.v * c(alpha * (epsilon * t).exp());
    let steps = (t0 / dt).ceil().max(1.0) as usize;
    let psi = evolve(&h, -t0, 0.0, &psi0, steps, propagator)?;
    let shifted = linalg::expectation(&psi, &prob.j).re - prob.ground_expectation(&prob.j).re;
    Ok(shifted / alpha)
}

/// `|Tr(P_i[I_i(V), H_i])| / ‖V‖`; zero when `V = 0`.
pub fn work_check(prob: &ResponseProblem, filter: &FilterSpec) -> Result<f64> {
    let norm = linalg::spectral_norm(&prob.v);
    if norm == 0.0 {
        return Ok(0.0);
    }
    let ctx = LiouvillianContext::new(prob.sd.clone(), filter.reoriented(Orientation::Inverse))?;
    let inv = quasi_local_inverse(&ctx, &prob.v, Path::Spectral)?;
    let tr = linalg::trace(&(prob.projector.matrix() * linalg::commutator(&inv, &prob.h)));
    Ok(tr.norm() / norm)
}
