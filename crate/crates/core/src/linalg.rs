//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Hermitian eigenproblems go
//! through [`eigh`], which falls back to the real symmetric solver whenever
//! the input has no imaginary part (most spin-chain Hamiltonians here).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn zeros(n: usize) -> Matrix {
    Matrix::zeros(n, n)
}

pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    m.singular_values().max()
}

/// Spectral norm of a hermitian or anti-hermitian matrix via its eigenvalues.
/// Cheaper than an SVD; callers must know the symmetry holds.
pub fn normal_norm(m: &Matrix) -> f64 {
    let herm = if hermiticity_defect(m) <= hermiticity_defect(&(m * I)) {
        m.clone()
    } else {
        m * I
    };
    eigh(&hermitize(&herm))
        .values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Frobenius norm of `M − M†`.
pub fn hermiticity_defect(m: &Matrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn hermitize(m: &Matrix) -> Matrix {
    (m + m.adjoint()) * c(0.5)
}

pub fn is_hermitian(m: &Matrix, rel_tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= rel_tol * m.norm().max(f64::MIN_POSITIVE)
}

pub fn trace(m: &Matrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn expectation(psi: &Vector, a: &Matrix) -> C64 {
    psi.dotc(&(a * psi))
}

pub fn ensure_same_dim(a: &Matrix, b: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Domain(format!(
            "expected a square matrix, found {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

/// Eigen-decomposition of a hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

pub fn eigh(m: &Matrix) -> Eigh {
    let n = m.nrows();
    let (values, vectors): (Vec<f64>, Matrix) = if m.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let eig = real.symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(c),
        )
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = Matrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Eigh {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// `exp(-i·t·H)` for hermitian `H`.
pub fn unitary_exp(h: &Matrix, t: f64) -> Matrix {
    let eig = eigh(h);
    let phases = Vector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&l| C64::from_polar(1.0, -t * l)),
    );
    let u = &eig.vectors;
    let scaled = Matrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * phases[j]);
    scaled * u.adjoint()
}

/// `exp(i·S)` for hermitian `S`.
pub fn exp_i_hermitian(s: &Matrix) -> Matrix {
    unitary_exp(s, -1.0)
}

/// Deviation ‖U†U − 1‖ (Frobenius).
pub fn unitarity_defect(u: &Matrix) -> f64 {
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// Finite-difference weights at `x0` for the derivative of order `m` on
/// arbitrary nodes (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigh_sorts_and_reconstructs() {
        let h = pauli_x() * c(0.3) + pauli_y() * c(-1.1) + pauli_z() * c(0.7);
        let eig = eigh(&h);
        assert!(eig.values[0] <= eig.values[1]);
        let d = Matrix::from_diagonal(&Vector::from_iterator(2, eig.values.iter().map(|&v| c(v))));
        let back = &eig.vectors * d * eig.vectors.adjoint();
        assert!((back - h).norm() < 1e-13);
    }

    #[test]
    fn unitary_exp_of_pauli_z() {
        let u = unitary_exp(&pauli_z(), 0.4);
        assert_relative_eq!(u[(0, 0)].re, 0.4_f64.cos(), epsilon = 1e-14);
        assert_relative_eq!(u[(0, 0)].im, -(0.4_f64.sin()), epsilon = 1e-14);
        assert!(unitarity_defect(&u) < 1e-14);
    }

    #[test]
    fn fornberg_reproduces_central_stencil() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expect = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn normal_norm_matches_svd() {
        let h = pauli_x() * c(2.0) + pauli_z() * c(1.0);
        assert_relative_eq!(normal_norm(&h), spectral_norm(&h), epsilon = 1e-12);
        let ah = commutator(&h, &pauli_y());
        assert_relative_eq!(normal_norm(&ah), spectral_norm(&ah), epsilon = 1e-12);
    }
}
