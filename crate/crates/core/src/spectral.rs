//! Exact diagonalization, ground projectors, the off-diagonal map `Q` and
//! Kato parallel transport.
//!
//! Eigenvectors are never compared across parameter values; anything that
//! is differentiated in `s` goes through projectors, which are gauge free.

use crate::error::{Error, Result};
use crate::linalg::{self, c, Matrix, Vector};
use crate::models::HamiltonianFamily;
use crate::operators::ManyBodyOperator;

/// Relative cluster tolerance: eigenvalues within `δ·‖H‖` of the minimum
/// form the ground patch.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct SpectralData {
    values: Vec<f64>,
    vectors: Matrix,
    patch: Vec<usize>,
    gap: f64,
}

impl SpectralData {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Indices of the spectral patch (a contiguous initial block).
    pub fn patch(&self) -> &[usize] {
        &self.patch
    }

    pub fn in_patch(&self, k: usize) -> bool {
        k < self.patch.len()
    }

    /// Distance from the patch to the rest of the spectrum; infinite when
    /// the patch is everything.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }

    /// `max |λ|`, which equals `‖H‖`.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Re-declares the patch as the lowest `rank` eigenvalues.
    pub fn with_patch_rank(&self, rank: usize) -> Result<Self> {
        if rank == 0 || rank > self.dim() {
            return Err(Error::InvalidParameter(format!(
                "patch rank {rank} outside 1..={}",
                self.dim()
            )));
        }
        let mut out = self.clone();
        out.patch = (0..rank).collect();
        out.gap = patch_gap(&self.values, rank);
        Ok(out)
    }

    /// `U† A U`.
    pub fn to_eigenbasis(&self, a: &Matrix) -> Matrix {
        self.vectors.adjoint() * a * &self.vectors
    }

    /// `U B U†`.
    pub fn from_eigenbasis(&self, b: &Matrix) -> Matrix {
        &self.vectors * b * self.vectors.adjoint()
    }

    /// Applies `f(λ_k, λ_l)` elementwise in the eigenbasis.
    pub fn apply_multiplier(&self, a: &Matrix, f: impl Fn(f64, f64) -> linalg::C64) -> Matrix {
        let mut b = self.to_eigenbasis(a);
        for k in 0..self.dim() {
            for l in 0..self.dim() {
                b[(k, l)] *= f(self.values[k], self.values[l]);
            }
        }
        self.from_eigenbasis(&b)
    }

    pub fn patch_projector(&self) -> Projector {
        let u = &self.vectors;
        let rank = self.patch.len();
        let cols = u.columns(0, rank);
        let adjoint = cols.adjoint();
        Projector {
            matrix: cols * adjoint,
            rank,
        }
    }

    /// ‖HU − UΛ‖ relative to ‖H‖.
    pub fn residual(&self, h: &Matrix) -> f64 {
        let lambda = Matrix::from_diagonal(&Vector::from_iterator(
            self.dim(),
            self.values.iter().map(|&v| c(v)),
        ));
        let r = h * &self.vectors - &self.vectors * lambda;
        linalg::spectral_norm(&r) / self.norm().max(f64::MIN_POSITIVE)
    }
}

fn patch_gap(values: &[f64], rank: usize) -> f64 {
    if rank >= values.len() {
        f64::INFINITY
    } else {
        values[rank] - values[rank - 1]
    }
}

/// Full eigendecomposition of a hermitian operator; the patch defaults to
/// the ground cluster at the default tolerance.
pub fn diagonalize(h: &ManyBodyOperator) -> Result<SpectralData> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: linalg::hermiticity_defect(h.matrix()),
        });
    }
    Ok(diagonalize_matrix(h.matrix()))
}

/// Like [`diagonalize`] for a matrix already known to be hermitian.
pub fn diagonalize_matrix(h: &Matrix) -> SpectralData {
    let eig = linalg::eigh(h);
    let scale = eig.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let delta = DEFAULT_CLUSTER_TOL * scale.max(1.0);
    let rank = eig
        .values
        .iter()
        .take_while(|&&v| v - eig.values[0] <= delta)
        .count();
    SpectralData {
        gap: patch_gap(&eig.values, rank),
        values: eig.values,
        vectors: eig.vectors,
        patch: (0..rank).collect(),
    }
}

/// An orthogonal projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: Matrix,
    rank: usize,
}

impl Projector {
    pub fn from_vector(v: &Vector) -> Self {
        let u = v / c(v.norm());
        Projector {
            matrix: &u * u.adjoint(),
            rank: 1,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn complement(&self) -> Matrix {
        linalg::identity(self.matrix.nrows()) - &self.matrix
    }

    /// `max(‖P² − P‖, ‖P† − P‖)`.
    pub fn defect(&self) -> f64 {
        let sq = linalg::spectral_norm(&(&self.matrix * &self.matrix - &self.matrix));
        let herm = linalg::spectral_norm(&(self.matrix.adjoint() - &self.matrix));
        sq.max(herm)
    }
}

/// Projector onto eigenvalues within `delta` of the minimum. Fails when the
/// next eigenvalue is also within `delta` of the cluster edge, i.e. the
/// patch is not isolated.
pub fn ground_projector(sd: &SpectralData, delta: f64) -> Result<Projector> {
    if delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cluster tolerance must be nonnegative, got {delta}"
        )));
    }
    let values = sd.values();
    let rank = values.iter().take_while(|&&v| v - values[0] <= delta).count();
    let gap = patch_gap(values, rank);
    if gap <= delta {
        return Err(Error::Gapless {
            gap,
            threshold: delta,
        });
    }
    Ok(sd.with_patch_rank(rank)?.patch_projector())
}

/// `Q(A) = (1−P)AP + PA(1−P)`.
pub fn offdiag(a: &Matrix, p: &Projector) -> Result<Matrix> {
    linalg::ensure_same_dim(a, p.matrix())?;
    let pm = p.matrix();
    let pa = pm * a;
    let ap = a * pm;
    let pap = &pa * pm;
    Ok(pa + ap - pap * c(2.0))
}

/// Block-diagonal part `PAP + (1−P)A(1−P)`.
pub fn diagonal_part(a: &Matrix, p: &Projector) -> Result<Matrix> {
    Ok(a - offdiag(a, p)?)
}

/// How `Ṗ_s` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectorDerivative {
    /// Fourth-order centered differences of ground projectors at step `h`.
    FiniteDifference { h: f64 },
    /// First-order perturbation theory from `Ḣ_s`: in the eigenbasis
    /// `Ṗ_kl = Ḣ_kl/(λ_k − λ_l)` for `k ∈ patch, l ∉ patch` (and its
    /// adjoint block).
    Perturbative,
}

impl Default for ProjectorDerivative {
    fn default() -> Self {
        ProjectorDerivative::FiniteDifference { h: DEFAULT_FD_STEP }
    }
}

/// Ground patch of `H_s`, cluster tolerance relative to `‖H_s‖`.
pub fn family_spectrum(fam: &HamiltonianFamily, s: f64) -> Result<SpectralData> {
    Ok(diagonalize_matrix(&fam.hamiltonian_matrix(s)))
}

pub fn family_ground_projector(fam: &HamiltonianFamily, s: f64) -> Result<Projector> {
    let sd = family_spectrum(fam, s)?;
    let delta = DEFAULT_CLUSTER_TOL * sd.norm().max(1.0);
    ground_projector(&sd, delta)
}

pub fn projector_derivative(
    fam: &HamiltonianFamily,
    s: f64,
    method: ProjectorDerivative,
) -> Result<Matrix> {
    match method {
        ProjectorDerivative::FiniteDifference { h } => {
            if h <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "difference step must be positive, got {h}"
                )));
            }
            let center = family_ground_projector(fam, s)?;
            let weights = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
            let mut acc = linalg::zeros(fam.dim());
            for (offset, w) in weights {
                let p = family_ground_projector(fam, s + offset * h)?;
                if p.rank() != center.rank() {
                    return Err(Error::Gapless {
                        gap: 0.0,
                        threshold: DEFAULT_CLUSTER_TOL,
                    });
                }
                acc += p.matrix() * c(w);
            }
            Ok(acc * c(1.0 / (12.0 * h)))
        }
        ProjectorDerivative::Perturbative => {
            let sd = family_spectrum(fam, s)?;
            let hdot = fam.derivative(s, 1)?.into_matrix();
            Ok(perturbative_projector_derivative(&sd, &hdot))
        }
    }
}

/// `Ṗ` of the patch projector from `Ḣ` (first-order perturbation theory).
pub fn perturbative_projector_derivative(sd: &SpectralData, hdot: &Matrix) -> Matrix {
    let rank = sd.patch().len();
    let mut b = sd.to_eigenbasis(hdot);
    let lambda = sd.values();
    for k in 0..sd.dim() {
        for l in 0..sd.dim() {
            let inside_k = k < rank;
            let inside_l = l < rank;
            b[(k, l)] = match (inside_k, inside_l) {
                (true, false) | (false, true) => {
                    let (p, q) = if inside_k { (k, l) } else { (l, k) };
                    b[(k, l)] / c(lambda[p] - lambda[q])
                }
                _ => linalg::ZERO,
            };
        }
    }
    sd.from_eigenbasis(&b)
}

/// Kato's generator `i[Ṗ_s, P_s]`.
pub fn kato_generator(fam: &HamiltonianFamily, s: f64, method: ProjectorDerivative) -> Result<Matrix> {
    let p = family_ground_projector(fam, s)?;
    let pdot = projector_derivative(fam, s, method)?;
    Ok(linalg::commutator(&pdot, p.matrix()) * linalg::I)
}

/// A state trajectory on an `s`-grid with its monitoring data.
#[derive(Debug, Clone)]
pub struct Transport {
    pub grid: Vec<f64>,
    pub states: Vec<Vector>,
    /// Largest `|‖Ω‖ − 1|` before each renormalization.
    pub norm_drift: f64,
    /// `max_s ‖(1 − P_s)Ω_s‖`.
    pub leakage: f64,
    /// `max_s ‖P_s Ω̇_s‖` with `Ω̇` differentiated from the trajectory.
    pub parallel_residual: f64,
}

impl Transport {
    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("nonempty trajectory")
    }
}

/// Integrates `Ω̇ = K(s)Ω` with classical RK4 on `grid`, renormalizing after
/// every step.
pub fn integrate_flow(
    grid: &[f64],
    initial: &Vector,
    generator: impl Fn(f64) -> Result<Matrix>,
) -> Result<(Vec<Vector>, f64)> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "grid needs at least two strictly increasing points".into(),
        ));
    }
    let norm0 = initial.norm();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "initial state must be normalized, ‖Ω₀‖ = {norm0}"
        )));
    }
    let mut states = Vec::with_capacity(grid.len());
    let mut psi = initial.clone();
    states.push(psi.clone());
    let mut drift = 0.0_f64;
    let mut k_left = generator(grid[0])?;
    for w in grid.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let h = s1 - s0;
        let k_mid = generator(0.5 * (s0 + s1))?;
        let k_right = generator(s1)?;
        let hc = c(h);
        let k1 = &k_left * &psi;
        let k2 = &k_mid * (&psi + &k1 * (hc * 0.5));
        let k3 = &k_mid * (&psi + &k2 * (hc * 0.5));
        let k4 = &k_right * (&psi + &k3 * hc);
        psi += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * (hc / 6.0);
        let n = psi.norm();
        drift = drift.max((n - 1.0).abs());
        psi /= c(n);
        states.push(psi.clone());
        k_left = k_right;
    }
    Ok((states, drift))
}

/// `‖(1−P_s)Ω_s‖` and `‖P_s Ω̇_s‖` along a trajectory, with `Ω̇` from
/// five-point differences on the grid.
pub fn transport_diagnostics(
    grid: &[f64],
    states: &[Vector],
    projector: impl Fn(f64) -> Result<Projector>,
) -> Result<(f64, f64)> {
    let n = grid.len();
    let mut leakage = 0.0_f64;
    let mut parallel = 0.0_f64;
    for j in 0..n {
        let p = projector(grid[j])?;
        let out = p.complement() * &states[j];
        leakage = leakage.max(out.norm());
        if n >= 5 {
            let lo = j.saturating_sub(2).min(n - 5);
            let nodes = &grid[lo..lo + 5];
            let weights = linalg::fornberg_weights(grid[j], nodes, 1);
            let mut deriv = Vector::zeros(states[j].len());
            for (i, w) in weights.iter().enumerate() {
                deriv += &states[lo + i] * c(*w);
            }
            parallel = parallel.max((p.matrix() * deriv).norm());
        }
    }
    Ok((leakage, parallel))
}

/// Parallel transport `P_s Ω̇_s = 0` of `Ω₀ ∈ Ran P₀` via `Ω̇ = [Ṗ, P]Ω`.
pub fn parallel_transport_kato(
    fam: &HamiltonianFamily,
    grid: &[f64],
    initial: &Vector,
    method: ProjectorDerivative,
) -> Result<Transport> {
    let p0 = family_ground_projector(fam, grid[0])?;
    let outside = (p0.complement() * initial).norm();
    if outside > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "initial state leaves the ground patch by {outside:.3e}"
        )));
    }
    let (states, norm_drift) = integrate_flow(grid, initial, |s| {
        let k = kato_generator(fam, s, method)?;
        Ok(k * (-linalg::I))
    })?;
    let (leakage, parallel_residual) =
        transport_diagnostics(grid, &states, |s| family_ground_projector(fam, s))?;
    Ok(Transport {
        grid: grid.to_vec(),
        states,
        norm_drift,
        leakage,
        parallel_residual,
    })
}

pub fn uniform_grid(a: f64, b: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|j| a + (b - a) * j as f64 / steps as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y, pauli_z, I, ONE, ZERO};
    use crate::models::{driven_ising_chain, rotating_field_chain, FieldPath, IsingParams, SwitchFunction};
    use crate::operators::{Chain, LocalOperator};
    use crate::models::{affine_family, LinearRamp};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn two_level() -> HamiltonianFamily {
        // −σ_z + sσ_x
        affine_family(
            Chain::spin_half(1).unwrap(),
            [LocalOperator::site(0, -pauli_z()).unwrap()],
            [LocalOperator::site(0, pauli_x()).unwrap()],
            Arc::new(LinearRamp),
        )
        .unwrap()
    }

    #[test]
    fn pauli_spectra() {
        let sd = diagonalize(&ManyBodyOperator::new(pauli_z()).unwrap()).unwrap();
        assert_eq!(sd.values(), &[-1.0, 1.0]);
        let sd = diagonalize(&ManyBodyOperator::new(-pauli_z()).unwrap()).unwrap();
        assert_eq!(sd.ground_energy(), -1.0);
        assert_eq!(sd.gap(), 2.0);
        assert!(sd.residual(&-pauli_z()) < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ManyBodyOperator::new(pauli_x() * I + pauli_z()).unwrap();
        assert!(matches!(diagonalize(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn two_site_ising_spectrum() {
        let fam = driven_ising_chain(
            2,
            IsingParams::transverse(0.2, 1.0, 0.0),
            Arc::new(SwitchFunction::default()),
        )
        .unwrap();
        let sd = family_spectrum(&fam, 0.0).unwrap();
        // roots of the characteristic polynomial (λ² − J²)(λ² − J² − 4h²)
        let r = (0.04_f64 + 4.0).sqrt();
        for (got, want) in sd.values().iter().zip([-r, -0.2, 0.2, r]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn ground_projector_ranks() {
        let sd = diagonalize_matrix(&-pauli_z());
        let p = ground_projector(&sd, 1e-8).unwrap();
        assert_eq!(p.rank(), 1);
        let expect = Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        assert!((p.matrix() - expect).norm() < 1e-15);

        let h = Matrix::from_diagonal(&Vector::from_vec(vec![c(-1.0), c(-1.0 + 1e-10), c(2.0)]));
        let p = ground_projector(&diagonalize_matrix(&h), 1e-8).unwrap();
        assert_eq!(p.rank(), 2);
        assert_relative_eq!(linalg::trace(p.matrix()).re, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn ground_projector_detects_gapless_edge() {
        let h = Matrix::from_diagonal(&Vector::from_vec(vec![c(0.0), c(0.8), c(1.5)]));
        let err = ground_projector(&diagonalize_matrix(&h), 1.0).unwrap_err();
        assert!(matches!(err, Error::Gapless { .. }));
    }

    #[test]
    fn rotating_field_projector_is_product() {
        let fam = rotating_field_chain(2, FieldPath::switched_rotation(1.0, SwitchFunction::default()))
            .unwrap();
        let s = 0.4;
        let p = family_ground_projector(&fam, s).unwrap();
        let single = rotating_field_chain(1, FieldPath::switched_rotation(1.0, SwitchFunction::default()))
            .unwrap();
        let p1 = family_ground_projector(&single, s).unwrap();
        let expect = linalg::kron(p1.matrix(), p1.matrix());
        assert!((p.matrix() - expect).norm() < 1e-12);
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn offdiag_examples() {
        let p = ground_projector(&diagonalize_matrix(&Matrix::from_diagonal(&Vector::from_vec(vec![c(0.0), c(1.0)]))), 1e-8)
            .unwrap();
        assert!((offdiag(&pauli_x(), &p).unwrap() - pauli_x()).norm() < 1e-15);
        assert!(offdiag(p.matrix(), &p).unwrap().norm() < 1e-15);
        let a = pauli_x() * c(0.3) + pauli_z() * c(1.7) + pauli_y() * c(-0.2);
        let q = offdiag(&a, &p).unwrap();
        assert!((offdiag(&q, &p).unwrap() - &q).norm() < 1e-15);
    }

    #[test]
    fn two_level_projector_derivative() {
        let fam = two_level();
        let expect = pauli_x() * c(-0.5);
        for method in [ProjectorDerivative::default(), ProjectorDerivative::Perturbative] {
            let pdot = projector_derivative(&fam, 0.0, method).unwrap();
            assert!((pdot - &expect).norm() < 1e-10, "{method:?}");
        }
        let k = kato_generator(&fam, 0.0, ProjectorDerivative::Perturbative).unwrap();
        assert!(linalg::hermiticity_defect(&k) < 1e-14);
    }

    #[test]
    fn constant_family_transport_is_static() {
        let fam = rotating_field_chain(1, FieldPath::fixed([0.0, 0.0, 1.0])).unwrap();
        let grid = uniform_grid(0.0, 1.0, 20);
        let psi0 = Vector::from_vec(vec![ONE, ZERO]);
        let t = parallel_transport_kato(&fam, &grid, &psi0, ProjectorDerivative::default()).unwrap();
        for psi in &t.states {
            assert!((psi - &psi0).norm() < 1e-14);
        }
    }

    #[test]
    fn spin_half_parallel_transport_has_no_phase() {
        // h = (sin θ, 0, cos θ), ground state (cos θ/2, sin θ/2) is real, so
        // ⟨Ω, Ω̇⟩ = 0 already holds for this gauge.
        let theta = 1.3;
        let switch = SwitchFunction::default();
        let fam = rotating_field_chain(1, FieldPath::switched_rotation(theta, switch.clone())).unwrap();
        let grid = uniform_grid(0.0, 1.0, 200);
        let psi0 = Vector::from_vec(vec![ONE, ZERO]);
        let t = parallel_transport_kato(&fam, &grid, &psi0, ProjectorDerivative::Perturbative).unwrap();
        for (s, psi) in grid.iter().zip(&t.states) {
            let half = 0.5 * theta * switch.g(*s);
            let exact = Vector::from_vec(vec![c(half.cos()), c(half.sin())]);
            assert!((psi - exact).norm() < 1e-8, "s = {s}");
        }
        assert!(t.leakage < 1e-8);
        assert!(t.parallel_residual < 1e-6);
    }

    #[test]
    fn gap_bound_on_projector_derivative() {
        let switch = SwitchFunction::default();
        let fam = driven_ising_chain(
            4,
            IsingParams::transverse(0.4, 1.0, 0.6),
            Arc::new(switch),
        )
        .unwrap();
        for s in [0.2, 0.5, 0.8] {
            let sd = family_spectrum(&fam, s).unwrap();
            let hdot = fam.derivative(s, 1).unwrap();
            let pdot = projector_derivative(&fam, s, ProjectorDerivative::default()).unwrap();
            assert!(linalg::spectral_norm(&pdot) <= 2.0 * hdot.norm() / sd.gap());
            let p = family_ground_projector(&fam, s).unwrap();
            // Ṗ is off-diagonal
            assert!(diagonal_part(&pdot, &p).unwrap().norm() < 1e-8);
            let comm = linalg::commutator(&fam.hamiltonian_matrix(s), p.matrix());
            assert!(linalg::spectral_norm(&comm) < 1e-9 * sd.norm());
        }
    }
}
