//! Finite spin chains, operators with tracked support, embedding into the
//! full tensor product, and the locality norms used to quantify "local
//! Hamiltonian".
//!
//! Sites are labelled `0..sites`. The tensor convention is fixed globally:
//! site 0 is the leftmost Kronecker factor, so in a basis index the
//! highest-numbered site is the least-significant digit.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, c, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chain {
    sites: usize,
    local_dim: usize,
}

impl Chain {
    pub fn new(sites: usize, local_dim: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::Domain("a chain needs at least one site".into()));
        }
        if local_dim < 2 {
            return Err(Error::Domain(format!(
                "local dimension must be ≥ 2, got {local_dim}"
            )));
        }
        local_dim
            .checked_pow(sites as u32)
            .ok_or_else(|| Error::Domain(format!("{local_dim}^{sites} overflows")))?;
        Ok(Chain { sites, local_dim })
    }

    pub fn spin_half(sites: usize) -> Result<Self> {
        Chain::new(sites, 2)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// Total Hilbert-space dimension `local_dim^sites`.
    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.sites as u32)
    }

    pub fn distance(&self, x: usize, y: usize) -> usize {
        x.abs_diff(y)
    }

    /// Distance between two nonempty site sets.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> usize {
        a.iter()
            .flat_map(|&x| b.iter().map(move |&y| x.abs_diff(y)))
            .min()
            .unwrap_or(usize::MAX)
    }

    /// The `r`-fattening `{x : d(x, region) ≤ r}`.
    pub fn fattening(&self, region: &[usize], r: usize) -> Vec<usize> {
        (0..self.sites)
            .filter(|&x| region.iter().any(|&z| x.abs_diff(z) <= r))
            .collect()
    }

    pub fn center(&self) -> usize {
        (self.sites - 1) / 2
    }

    fn check_region(&self, region: &[usize]) -> Result<()> {
        if region.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "support {region:?} must be strictly increasing"
            )));
        }
        if let Some(&x) = region.iter().find(|&&x| x >= self.sites) {
            return Err(Error::Domain(format!(
                "site {x} lies outside a chain of {} sites",
                self.sites
            )));
        }
        Ok(())
    }

    /// Basis-index offset contributed by each configuration of `region`.
    fn offsets(&self, region: &[usize]) -> Vec<usize> {
        let d = self.local_dim;
        let k = region.len();
        let count = d.pow(k as u32);
        (0..count)
            .map(|cfg| {
                let mut rest = cfg;
                let mut off = 0;
                for j in (0..k).rev() {
                    let digit = rest % d;
                    rest /= d;
                    off += digit * d.pow((self.sites - 1 - region[j]) as u32);
                }
                off
            })
            .collect()
    }

    fn complement(&self, region: &[usize]) -> Vec<usize> {
        (0..self.sites).filter(|x| !region.contains(x)).collect()
    }
}

/// A matrix acting on the sites of `support`, ordered like the support.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    support: Vec<usize>,
    matrix: Matrix,
}

impl LocalOperator {
    pub fn new(support: Vec<usize>, matrix: Matrix, local_dim: usize) -> Result<Self> {
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "support {support:?} must be strictly increasing"
            )));
        }
        let expected = local_dim.pow(support.len() as u32);
        if !matrix.is_square() || matrix.nrows() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.nrows(),
            });
        }
        Ok(LocalOperator { support, matrix })
    }

    /// Spin-½ operator on one site.
    pub fn site(site: usize, matrix: Matrix) -> Result<Self> {
        LocalOperator::new(vec![site], matrix, 2)
    }

    /// Spin-½ product `a ⊗ b` on sites `x < y`.
    pub fn pair(x: usize, a: &Matrix, y: usize, b: &Matrix) -> Result<Self> {
        LocalOperator::new(vec![x, y], linalg::kron(a, b), 2)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        linalg::is_hermitian(&self.matrix, 1e-12)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        LocalOperator {
            support: self.support.clone(),
            matrix: &self.matrix * c(factor),
        }
    }
}

/// An operator on the full chain Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyOperator {
    matrix: Matrix,
    hermitian: bool,
}

impl ManyBodyOperator {
    /// Wraps a square matrix, recording whether it is hermitian to
    /// `1e-12·‖M‖`.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Domain(format!(
                "expected a square matrix, found {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let hermitian = linalg::is_hermitian(&matrix, 1e-12);
        Ok(ManyBodyOperator { matrix, hermitian })
    }

    pub fn hermitian(matrix: Matrix) -> Result<Self> {
        let op = ManyBodyOperator::new(matrix)?;
        if !op.hermitian {
            return Err(Error::NotHermitian {
                deviation: linalg::hermiticity_defect(&op.matrix),
            });
        }
        Ok(op)
    }

    pub fn identity(chain: &Chain) -> Self {
        ManyBodyOperator {
            matrix: linalg::identity(chain.dim()),
            hermitian: true,
        }
    }

    pub fn zero(chain: &Chain) -> Self {
        ManyBodyOperator {
            matrix: linalg::zeros(chain.dim()),
            hermitian: true,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }
}

/// `op ⊗ 1` on the complement of its support.
pub fn embed(op: &LocalOperator, chain: &Chain) -> Result<ManyBodyOperator> {
    chain.check_region(&op.support)?;
    let expected = chain.local_dim.pow(op.support.len() as u32);
    if op.matrix.nrows() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: op.matrix.nrows(),
        });
    }
    let inside = chain.offsets(&op.support);
    let outside = chain.offsets(&chain.complement(&op.support));
    let dim = chain.dim();
    let mut full = linalg::zeros(dim);
    for &base in &outside {
        for (a, &ia) in inside.iter().enumerate() {
            for (b, &ib) in inside.iter().enumerate() {
                full[(base + ia, base + ib)] = op.matrix[(a, b)];
            }
        }
    }
    ManyBodyOperator::new(full)
}

/// `AB − BA`.
pub fn commutator(a: &ManyBodyOperator, b: &ManyBodyOperator) -> Result<ManyBodyOperator> {
    linalg::ensure_same_dim(&a.matrix, &b.matrix)?;
    ManyBodyOperator::new(linalg::commutator(&a.matrix, &b.matrix))
}

/// Normalized partial trace over the complement of `region`, as a matrix on
/// `region` (tensor order following the sorted region).
pub fn reduce_to_region(op: &Matrix, chain: &Chain, region: &[usize]) -> Result<Matrix> {
    chain.check_region(region)?;
    if op.nrows() != chain.dim() {
        return Err(Error::DimensionMismatch {
            expected: chain.dim(),
            found: op.nrows(),
        });
    }
    let inside = chain.offsets(region);
    let outside = chain.offsets(&chain.complement(region));
    let norm = c(1.0 / outside.len() as f64);
    let k = inside.len();
    let mut reduced = linalg::zeros(k);
    for (a, &ia) in inside.iter().enumerate() {
        for (b, &ib) in inside.iter().enumerate() {
            let mut acc = linalg::ZERO;
            for &base in &outside {
                acc += op[(base + ia, base + ib)];
            }
            reduced[(a, b)] = acc * norm;
        }
    }
    Ok(reduced)
}

/// Conditional expectation onto the algebra of `region`:
/// `(Tr_{region^c} op / dim(region^c)) ⊗ 1`.
pub fn conditional_expectation(op: &Matrix, chain: &Chain, region: &[usize]) -> Result<Matrix> {
    if region.is_empty() {
        return Ok(linalg::identity(chain.dim()) * (linalg::trace(op) / c(chain.dim() as f64)));
    }
    let reduced = reduce_to_region(op, chain, region)?;
    let local = LocalOperator::new(region.to_vec(), reduced, chain.local_dim)?;
    Ok(embed(&local, chain)?.into_matrix())
}

/// `‖op − E_r(op)‖` for each radius, where `E_r` is the conditional
/// expectation onto the `r`-fattening of `center`.
pub fn support_decay_profile(
    op: &Matrix,
    chain: &Chain,
    center: &[usize],
    radii: &[usize],
) -> Result<Vec<f64>> {
    chain.check_region(center)?;
    if center.is_empty() {
        return Err(Error::Domain("center region must be nonempty".into()));
    }
    radii
        .iter()
        .map(|&r| {
            let region = chain.fattening(center, r);
            if region.len() == chain.sites() {
                return Ok(0.0);
            }
            let approx = conditional_expectation(op, chain, &region)?;
            Ok(linalg::spectral_norm(&(op - approx)))
        })
        .collect()
}

/// A finite collection of hermitian interaction terms `Φ(X)`, at most one
/// per support.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionPotential {
    chain: Chain,
    terms: BTreeMap<Vec<usize>, Matrix>,
}

impl InteractionPotential {
    /// Terms sharing a support are summed into a single `Φ(X)`.
    pub fn new(chain: Chain, terms: impl IntoIterator<Item = LocalOperator>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<usize>, Matrix> = BTreeMap::new();
        for term in terms {
            chain.check_region(&term.support)?;
            if term.matrix.nrows() != chain.local_dim.pow(term.support.len() as u32) {
                return Err(Error::DimensionMismatch {
                    expected: chain.local_dim.pow(term.support.len() as u32),
                    found: term.matrix.nrows(),
                });
            }
            if !term.is_hermitian() {
                return Err(Error::NotHermitian {
                    deviation: linalg::hermiticity_defect(&term.matrix),
                });
            }
            merged
                .entry(term.support)
                .and_modify(|m| *m += &term.matrix)
                .or_insert(term.matrix);
        }
        Ok(InteractionPotential {
            chain,
            terms: merged,
        })
    }

    pub fn zero(chain: Chain) -> Self {
        InteractionPotential {
            chain,
            terms: BTreeMap::new(),
        }
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = LocalOperator> + '_ {
        self.terms.iter().map(|(support, m)| LocalOperator {
            support: support.clone(),
            matrix: m.clone(),
        })
    }

    /// `H_Λ = Σ_X Φ(X)`.
    pub fn assemble(&self) -> Result<ManyBodyOperator> {
        let mut total = linalg::zeros(self.chain.dim());
        for term in self.terms() {
            total += embed(&term, &self.chain)?.matrix;
        }
        ManyBodyOperator::new(total)
    }
}

/// The decay weight `F(r) = (1 + r)^(−k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialDecay {
    pub exponent: f64,
}

impl Default for PolynomialDecay {
    fn default() -> Self {
        PolynomialDecay { exponent: 6.0 }
    }
}

impl PolynomialDecay {
    pub fn weight(&self, r: f64) -> f64 {
        (1.0 + r).powf(-self.exponent)
    }
}

/// `‖Φ‖_F = sup_{x,y} F(d(x,y))⁻¹ Σ_{Z ∋ x,y} ‖Φ(Z)‖` over the finite chain.
pub fn f_norm(pot: &InteractionPotential, decay: impl Fn(f64) -> f64) -> Result<f64> {
    let chain = pot.chain();
    let norms: Vec<(&Vec<usize>, f64)> = pot
        .terms
        .iter()
        .map(|(s, m)| (s, linalg::spectral_norm(m)))
        .collect();
    let mut best = 0.0_f64;
    for x in 0..chain.sites() {
        for y in x..chain.sites() {
            let weight = decay(chain.distance(x, y) as f64);
            if weight <= 0.0 {
                return Err(Error::InvalidParameter(
                    "decay function must be strictly positive".into(),
                ));
            }
            let sum: f64 = norms
                .iter()
                .filter(|(s, _)| s.contains(&x) && s.contains(&y))
                .map(|(_, n)| n)
                .sum();
            best = best.max(sum / weight);
        }
    }
    Ok(best)
}

/// `‖F‖₁ = sup_x Σ_y F(d(x,y))` on the chain.
pub fn decay_one_norm(chain: &Chain, decay: impl Fn(f64) -> f64) -> f64 {
    (0..chain.sites())
        .map(|x| {
            (0..chain.sites())
                .map(|y| decay(chain.distance(x, y) as f64))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// The convolution constant `C_F`, reported only.
pub fn decay_convolution_constant(chain: &Chain, decay: impl Fn(f64) -> f64) -> f64 {
    let n = chain.sites();
    let mut best = 0.0_f64;
    for x in 0..n {
        for z in 0..n {
            let denom = decay(chain.distance(x, z) as f64);
            let sum: f64 = (0..n)
                .map(|y| decay(chain.distance(x, y) as f64) * decay(chain.distance(y, z) as f64))
                .sum();
            best = best.max(sum / denom);
        }
    }
    best
}
