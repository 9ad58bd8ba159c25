//! Inverse Liouvillians and the Hastings generator.
//!
//! Every map here is an elementwise multiplier in the eigenbasis of `H`,
//! indexed by `ω = λ_k − λ_l`. Two orientations are in play:
//!
//! * `I(A)`: multiplier `+i(1 − φ(ω/γ))/ω`, so `−i[H, I(A)] = A` on all
//!   matrix elements with `|ω| ≥ γ`;
//! * `G = −I(Ḣ)`: multiplier `−i(1 − φ(ω/γ))/ω`, so `Ṗ = −i[G, P]`.
//!
//! Each has a spectral path (authoritative) and a time-domain path through
//! the sampled weight `W`, used to measure locality.

use crate::error::{Error, Result};
use crate::filter::{FilterFunction, FilterSpec, Orientation};
use crate::linalg::{self, c, Matrix, Vector, I};
use crate::models::HamiltonianFamily;
use crate::operators::{support_decay_profile, LocalOperator};
use crate::spectral::{self, integrate_flow, transport_diagnostics, Projector, SpectralData, Transport};

/// Below this eigenvalue separation the exact inverse is declared singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// `L = −i[H, ·]` together with its data.
#[derive(Debug, Clone)]
pub struct LiouvillianContext {
    sd: SpectralData,
    filter: FilterSpec,
    projector: Projector,
}

impl LiouvillianContext {
    /// Fails with [`Error::FilterGap`] when the filter gap exceeds the gap
    /// of the spectral patch.
    pub fn new(sd: SpectralData, filter: FilterSpec) -> Result<Self> {
        if filter.gamma() > sd.gap() {
            return Err(Error::FilterGap {
                filter: filter.gamma(),
                gap: sd.gap(),
            });
        }
        let projector = sd.patch_projector();
        Ok(LiouvillianContext {
            sd,
            filter,
            projector,
        })
    }

    pub fn from_hamiltonian(h: &Matrix, filter: FilterSpec) -> Result<Self> {
        LiouvillianContext::new(spectral::diagonalize_matrix(h), filter)
    }

    pub fn at(fam: &HamiltonianFamily, s: f64, filter: FilterSpec) -> Result<Self> {
        LiouvillianContext::from_hamiltonian(&fam.hamiltonian_matrix(s), filter)
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.sd
    }

    pub fn filter(&self) -> &FilterSpec {
        &self.filter
    }

    pub fn gamma(&self) -> f64 {
        self.filter.gamma()
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn hamiltonian(&self) -> Matrix {
        self.sd.from_eigenbasis(&Matrix::from_diagonal(&Vector::from_iterator(
            self.sd.dim(),
            self.sd.values().iter().map(|&v| c(v)),
        )))
    }

    fn apply(&self, a: &Matrix, orientation: Orientation) -> Result<Matrix> {
        linalg::ensure_same_dim(a, self.sd.vectors())?;
        let spec = self.filter.reoriented(orientation);
        Ok(self.sd.apply_multiplier(a, |lk, ll| spec.multiplier(lk - ll)))
    }
}

/// Evaluation route for the filtered maps.
#[derive(Debug, Clone, Copy)]
pub enum Path<'a> {
    Spectral,
    TimeDomain(&'a FilterFunction),
}

fn time_domain(ctx: &LiouvillianContext, f: &FilterFunction, a: &Matrix, want: Orientation) -> Result<Matrix> {
    linalg::ensure_same_dim(a, ctx.sd.vectors())?;
    let out = f.apply_time_domain(&ctx.sd, a);
    Ok(if f.spec().orientation() == want { out } else { -out })
}

/// The exact inverse on `Ran Q`: `B_kl = i·Q(A)_kl/(λ_k − λ_l)`.
pub fn inverse_liouvillian_spectral(ctx: &LiouvillianContext, a: &Matrix) -> Result<Matrix> {
    linalg::ensure_same_dim(a, ctx.sd.vectors())?;
    let rank = ctx.sd.patch().len();
    let lambda = ctx.sd.values();
    let mut b = ctx.sd.to_eigenbasis(a);
    for k in 0..ctx.sd.dim() {
        for l in 0..ctx.sd.dim() {
            if (k < rank) == (l < rank) {
                b[(k, l)] = linalg::ZERO;
                continue;
            }
            let diff = lambda[k] - lambda[l];
            if diff.abs() < SINGULAR_TOL {
                return Err(Error::Singular { difference: diff });
            }
            b[(k, l)] *= I / diff;
        }
    }
    Ok(ctx.sd.from_eigenbasis(&b))
}

/// The quasi-local inverse `I(A)`.
pub fn quasi_local_inverse(ctx: &LiouvillianContext, a: &Matrix, path: Path<'_>) -> Result<Matrix> {
    match path {
        Path::Spectral => ctx.apply(a, Orientation::Inverse),
        Path::TimeDomain(f) => time_domain(ctx, f, a, Orientation::Inverse),
    }
}

/// The Hastings generator `G = −I(Ḣ)`; hermitian for hermitian `Ḣ`.
pub fn hastings_generator(ctx: &LiouvillianContext, hdot: &Matrix, path: Path<'_>) -> Result<Matrix> {
    match path {
        Path::Spectral => ctx.apply(hdot, Orientation::Generator),
        Path::TimeDomain(f) => time_domain(ctx, f, hdot, Orientation::Generator),
    }
}

/// Keeps only eigenbasis matrix elements with `|λ_k − λ_l| ≥ γ`.
pub fn frequency_restricted(sd: &SpectralData, a: &Matrix, gamma: f64) -> Matrix {
    sd.apply_multiplier(a, |lk, ll| if (lk - ll).abs() >= gamma { linalg::ONE } else { linalg::ZERO })
}

/// `−i[H, B]`.
pub fn liouvillian(ctx: &LiouvillianContext, b: &Matrix) -> Matrix {
    linalg::commutator(&ctx.hamiltonian(), b) * (-I)
}

/// `‖[A, P] + i[[H, I(A)], P]‖`.
pub fn local_inverse_defect(ctx: &LiouvillianContext, a: &Matrix) -> Result<f64> {
    let inv = quasi_local_inverse(ctx, a, Path::Spectral)?;
    let p = ctx.projector.matrix();
    let lhs = linalg::commutator(a, p);
    let inner = linalg::commutator(&ctx.hamiltonian(), &inv);
    let rhs = linalg::commutator(&inner, p) * I;
    Ok(linalg::spectral_norm(&(lhs + rhs)))
}

/// `G^H_s` at a point of a family.
pub fn family_generator(fam: &HamiltonianFamily, s: f64, filter: &FilterSpec) -> Result<Matrix> {
    let ctx = LiouvillianContext::at(fam, s, filter.clone())?;
    let hdot = fam.derivative(s, 1)?.into_matrix();
    hastings_generator(&ctx, &hdot, Path::Spectral)
}

/// Solves `iΩ̇ = G^H_s Ω` on the grid (RK4, renormalized).
pub fn quasiadiabatic_transport(
    fam: &HamiltonianFamily,
    grid: &[f64],
    initial: &Vector,
    filter: &FilterSpec,
) -> Result<Transport> {
    let (states, norm_drift) = integrate_flow(grid, initial, |s| {
        Ok(family_generator(fam, s, filter)? * (-I))
    })?;
    let (leakage, parallel_residual) =
        transport_diagnostics(grid, &states, |s| spectral::family_ground_projector(fam, s))?;
    Ok(Transport {
        grid: grid.to_vec(),
        states,
        norm_drift,
        leakage,
        parallel_residual,
    })
}

/// `|⟨Ω^a_s, Ω^b_s⟩|` minimized over the common grid.
pub fn transport_fidelity(a: &Transport, b: &Transport) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| x.dotc(y).norm())
        .fold(1.0, f64::min)
}

/// Smallest `Re⟨Ω^a_s, Ω^b_s⟩`: detects relative phases that the modulus
/// in [`transport_fidelity`] hides.
pub fn transport_overlap_real(a: &Transport, b: &Transport) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| x.dotc(y).re)
        .fold(1.0, f64::min)
}

/// Decay profile `r ↦ ‖G_X − E_r(G_X)‖` of the time-domain image `G_X` of
/// one local term of `Ḣ_s` (the term is supplied already differentiated).
pub fn locality_of_generator(
    fam: &HamiltonianFamily,
    s: f64,
    term: &LocalOperator,
    filter: &FilterFunction,
    radii: &[usize],
) -> Result<Vec<f64>> {
    let ctx = LiouvillianContext::at(fam, s, filter.spec().clone())?;
    let local = crate::operators::embed(term, fam.chain())?.into_matrix();
    let image = hastings_generator(&ctx, &local, Path::TimeDomain(filter))?;
    support_decay_profile(&image, fam.chain(), term.support(), radii)
}
