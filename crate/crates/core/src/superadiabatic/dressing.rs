//! The dressing `V = exp(iS)`, `S = Σ_{p≤n} ε^p A_p`, built node by node on
//! a Chebyshev grid, and the resulting dressed projector and rest term.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::FilterSpec;
use crate::linalg::{self, c, Matrix, I};
use crate::models::HamiltonianFamily;
use crate::quasiadiabatic::{hastings_generator, quasi_local_inverse, LiouvillianContext, Path};
use crate::spectral::{self, Projector, ProjectorDerivative};

use super::chebyshev::ChebyshevGrid;
use super::series::{k_coefficient, t_coefficient};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    s: f64,
    h: Matrix,
    generator: Matrix,
    projector: Projector,
    ctx: LiouvillianContext,
}

/// `{A_p(s_j)}` and `{Ȧ_p(s_j)}` for `p = 1..=n` on the grid.
#[derive(Debug, Clone)]
pub struct DressingSequence {
    grid: ChebyshevGrid,
    order: usize,
    nodes: Vec<Node>,
    a: Vec<Vec<Matrix>>,
    a_dot: Vec<Vec<Matrix>>,
    cancellation: Vec<f64>,
}

impl DressingSequence {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &ChebyshevGrid {
        &self.grid
    }

    /// `A_p` at node `j`.
    pub fn a(&self, p: usize, j: usize) -> &Matrix {
        &self.a[p - 1][j]
    }

    pub fn a_dot(&self, p: usize, j: usize) -> &Matrix {
        &self.a_dot[p - 1][j]
    }

    pub fn projector(&self, j: usize) -> &Projector {
        &self.nodes[j].projector
    }

    pub fn hamiltonian(&self, j: usize) -> &Matrix {
        &self.nodes[j].h
    }

    pub fn generator(&self, j: usize) -> &Matrix {
        &self.nodes[j].generator
    }

    /// `max_j ‖[T_p + K_p + δ_{p1}G, P]‖` per order: the quantity each
    /// `A_p` is constructed to annihilate.
    pub fn cancellation_residuals(&self) -> &[f64] {
        &self.cancellation
    }
}

/// Builds `A₁ = −I(G)` and `A_p = −I(D_p)` for `2 ≤ p ≤ n`, where `D_p`
/// gathers everything in the `ε^p` coefficient except `i[A_p, H]`.
pub fn build_dressing(
    fam: &HamiltonianFamily,
    filter: &FilterSpec,
    order: usize,
    node_count: usize,
) -> Result<DressingSequence> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "dressing order must lie in 1..={MAX_ORDER}, got {order}"
        )));
    }
    if fam.k_max() < order + 1 {
        return Err(Error::DerivativeOrder {
            order: order + 1,
            max: fam.k_max(),
        });
    }
    let grid = ChebyshevGrid::new(node_count)?;
    let nodes: Vec<Node> = grid
        .nodes()
        .par_iter()
        .map(|&s| {
            let h = fam.hamiltonian_matrix(s);
            let ctx = LiouvillianContext::from_hamiltonian(&h, filter.clone())?;
            let hdot = fam.derivative(s, 1)?.into_matrix();
            let generator = hastings_generator(&ctx, &hdot, Path::Spectral)?;
            let projector = ctx.projector().clone();
            Ok(Node {
                s,
                h,
                generator,
                projector,
                ctx,
            })
        })
        .collect::<Result<_>>()?;

    let dim = fam.dim();
    let mut a: Vec<Vec<Matrix>> = Vec::with_capacity(order);
    let mut a_dot: Vec<Vec<Matrix>> = Vec::with_capacity(order);
    let mut cancellation = Vec::with_capacity(order);
    for p in 1..=order {
        let results: Vec<(Matrix, f64)> = (0..nodes.len())
            .into_par_iter()
            .map(|j| {
                let node = &nodes[j];
                let lower: Vec<Matrix> = a.iter().map(|level| level[j].clone()).collect();
                let lower_dot: Vec<Matrix> = a_dot.iter().map(|level| level[j].clone()).collect();
                let mut with_placeholder = lower.clone();
                with_placeholder.push(linalg::zeros(dim));
                let mut d = t_coefficient(p, dim, &lower, &lower_dot)? + k_coefficient(p, &with_placeholder, &node.h)?;
                if p == 1 {
                    d += &node.generator;
                }
                let ap = -quasi_local_inverse(&node.ctx, &d, Path::Spectral)?;
                let ap = linalg::hermitize(&ap);
                let full = &d + linalg::commutator(&ap, &node.h) * I;
                let residual = linalg::spectral_norm(&linalg::commutator(&full, node.projector.matrix()));
                Ok((ap, residual))
            })
            .collect::<Result<_>>()?;
        let level: Vec<Matrix> = results.iter().map(|(m, _)| m.clone()).collect();
        cancellation.push(results.iter().map(|(_, r)| *r).fold(0.0, f64::max));
        let mut level_dot = grid.differentiate(&level)?;
        if fam.flat_endpoints() {
            // every derivative of A_p vanishes where the drive is flat; the
            // spectral derivative only resolves this to ~1e-4 at 33 nodes
            let last = level_dot.len() - 1;
            level_dot[0].fill(linalg::ZERO);
            level_dot[last].fill(linalg::ZERO);
        }
        a_dot.push(level_dot);
        a.push(level);
    }
    Ok(DressingSequence {
        grid,
        order,
        nodes,
        a,
        a_dot,
        cancellation,
    })
}

/// `Π = VPV*`, the rest term `R = V·Q(rem)·V*` and intermediate data at one
/// node for one ε.
#[derive(Debug, Clone)]
pub struct DressedProjector {
    pub s: f64,
    pub epsilon: f64,
    pub pi: Matrix,
    pub rest: Matrix,
    pub v: Matrix,
    /// `V̇V*`.
    pub v_dot_v_adj: Matrix,
}

/// `e^{−iS} d/ds e^{iS}` from `S` and `Ṡ`, exactly in the eigenbasis of
/// `S`: elements `iṠ_kl·e^{−iΔ/2}·sinc(Δ/2)` with `Δ = σ_k − σ_l`.
pub fn exp_derivative_left(s: &Matrix, s_dot: &Matrix) -> Matrix {
    let eig = linalg::eigh(s);
    let u = &eig.vectors;
    let mut b = u.adjoint() * s_dot * u;
    let n = eig.values.len();
    for k in 0..n {
        for l in 0..n {
            let half = 0.5 * (eig.values[k] - eig.values[l]);
            let sinc = if half.abs() < 1e-8 {
                1.0 - half * half / 6.0
            } else {
                half.sin() / half
            };
            b[(k, l)] *= I * linalg::C64::from_polar(sinc, -half);
        }
    }
    u * b * u.adjoint()
}

pub fn dressed_projector_and_rest(seq: &DressingSequence, epsilon: f64, node: usize) -> Result<DressedProjector> {
    if node >= seq.nodes.len() {
        return Err(Error::InvalidParameter(format!(
            "node {node} outside the grid of {} nodes",
            seq.nodes.len()
        )));
    }
    let n = &seq.nodes[node];
    let dim = n.h.nrows();
    let mut s = linalg::zeros(dim);
    let mut s_dot = linalg::zeros(dim);
    let mut pow = epsilon;
    for p in 1..=seq.order {
        s += seq.a(p, node) * c(pow);
        s_dot += seq.a_dot(p, node) * c(pow);
        pow *= epsilon;
    }
    let v = linalg::exp_i_hermitian(&s);
    let vd = v.adjoint();
    let left = exp_derivative_left(&s, &s_dot);
    let rem = &left * (I * epsilon) + &n.generator * c(epsilon) + &n.h - &vd * &n.h * &v;
    let q = spectral::offdiag(&rem, &n.projector)?;
    let rest = linalg::hermitize(&(&v * q * &vd));
    let pi = &v * n.projector.matrix() * &vd;
    let v_dot_v_adj = &v * left * &vd;
    Ok(DressedProjector {
        s: n.s,
        epsilon,
        pi,
        rest,
        v,
        v_dot_v_adj,
    })
}

/// `‖iεΠ̇ − [H + R, Π]‖` with `Π̇ = [V̇V*, Π] + VṖV*` and `Ṗ` by projector
/// finite differences.
pub fn dressed_evolution_residual(
    seq: &DressingSequence,
    fam: &HamiltonianFamily,
    entry: &DressedProjector,
    node: usize,
) -> Result<f64> {
    let pdot = spectral::projector_derivative(fam, entry.s, ProjectorDerivative::default())?;
    let pi_dot = linalg::commutator(&entry.v_dot_v_adj, &entry.pi) + &entry.v * pdot * entry.v.adjoint();
    let lhs = pi_dot * (I * entry.epsilon);
    let rhs = linalg::commutator(&(seq.hamiltonian(node) + &entry.rest), &entry.pi);
    Ok(linalg::spectral_norm(&(lhs - rhs)))
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderDiagnostics {
    pub order: usize,
    pub max_norm: f64,
    pub norm_at_start: f64,
    pub norm_at_end: f64,
    pub cancellation_residual: f64,
    pub max_hermiticity_defect: f64,
}

pub fn dressing_diagnostics(seq: &DressingSequence) -> Vec<OrderDiagnostics> {
    let last = seq.grid.len() - 1;
    (1..=seq.order)
        .map(|p| {
            let level = &seq.a[p - 1];
            OrderDiagnostics {
                order: p,
                max_norm: level.iter().map(linalg::spectral_norm).fold(0.0, f64::max),
                norm_at_start: linalg::spectral_norm(&level[0]),
                norm_at_end: linalg::spectral_norm(&level[last]),
                cancellation_residual: seq.cancellation[p - 1],
                max_hermiticity_defect: level.iter().map(linalg::hermiticity_defect).fold(0.0, f64::max),
            }
        })
        .collect()
}
