//! Order-by-order coefficients of the two commutator series behind the
//! dressing transformation, for `S = Σ_p ε^p A_p`:
//!
//! * `ε·T(ε) = iε e^{−iS} d/ds e^{iS} = −ε Σ_m (−i)^m/(m+1)! ad_S^m(Ṡ)`,
//! * `K(ε) = H − e^{−iS} H e^{iS} = −Σ_{m≥1} (−i)^m/m! ad_S^m(H)`.
//!
//! The `ε^p` coefficient of each is a sum over ordered compositions of the
//! index budget into the orders of the nested commutators.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, C64, I};

/// All ordered tuples of positive integers with `parts` entries summing to
/// `total`.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if total < parts {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `ad_{A_{q₁}} ⋯ ad_{A_{q_m}}(x)` with `a[q − 1] = A_q`.
fn nested(a: &[Matrix], orders: &[usize], x: &Matrix) -> Matrix {
    orders
        .iter()
        .rev()
        .fold(x.clone(), |acc, &q| linalg::commutator(&a[q - 1], &acc))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn minus_i_pow(m: usize) -> C64 {
    match m % 4 {
        0 => linalg::ONE,
        1 => -I,
        2 => -linalg::ONE,
        _ => I,
    }
}

/// `T_p`, the `ε^p` coefficient of `εT(ε)`, on a space of dimension
/// `dim`. Needs `A_q, Ȧ_q` for `q < p`.
pub fn t_coefficient(p: usize, dim: usize, a: &[Matrix], a_dot: &[Matrix]) -> Result<Matrix> {
    if p == 0 {
        return Err(Error::InvalidParameter("orders start at 1".into()));
    }
    let budget = p - 1;
    if a.len() < budget.saturating_sub(1) || a_dot.len() < budget {
        return Err(Error::InvalidParameter(format!(
            "T_{p} needs A_q and their derivatives up to q = {budget}"
        )));
    }
    let mut total = linalg::zeros(dim);
    if budget == 0 {
        return Ok(total);
    }
    for m in 0..budget {
        let coeff = -minus_i_pow(m) / factorial(m + 1);
        for comp in compositions(budget, m + 1) {
            let (q0, rest) = comp.split_first().expect("m + 1 ≥ 1 parts");
            total += nested(a, rest, &a_dot[q0 - 1]) * coeff;
        }
    }
    Ok(total)
}

/// `K_p`, the `ε^p` coefficient of `H − e^{−iS}He^{iS}`. Needs `A_q` for
/// `q ≤ p`.
pub fn k_coefficient(p: usize, a: &[Matrix], h: &Matrix) -> Result<Matrix> {
    if p == 0 {
        return Err(Error::InvalidParameter("orders start at 1".into()));
    }
    if a.len() < p {
        return Err(Error::InvalidParameter(format!("K_{p} needs A_1..A_{p}")));
    }
    let mut total = linalg::zeros(h.nrows());
    for m in 1..=p {
        let coeff = -minus_i_pow(m) / factorial(m);
        for comp in compositions(p, m) {
            total += nested(a, &comp, h) * coeff;
        }
    }
    Ok(total)
}

/// `{T_p}` and `{K_p}` for `p = 1..=a.len()`.
#[derive(Debug, Clone)]
pub struct SeriesCoefficients {
    pub t: Vec<Matrix>,
    pub k: Vec<Matrix>,
}

pub fn adjoint_series_coefficients(a: &[Matrix], a_dot: &[Matrix], h: &Matrix) -> Result<SeriesCoefficients> {
    let n = a.len();
    let t = (1..=n)
        .map(|p| t_coefficient(p, h.nrows(), a, a_dot))
        .collect::<Result<_>>()?;
    let k = (1..=n)
        .map(|p| k_coefficient(p, a, h))
        .collect::<Result<_>>()?;
    Ok(SeriesCoefficients { t, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn random_hermitian(seed: u64, n: usize) -> Matrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = Matrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        linalg::hermitize(&m)
    }

    /// ε^p coefficient of an analytic matrix function by a discrete Cauchy
    /// integral on |ε| = r.
    fn taylor_coefficient(f: impl Fn(C64) -> Matrix, p: usize, r: f64, points: usize) -> Matrix {
        let mut acc = f(C64::new(r, 0.0)) * linalg::ZERO;
        for j in 0..points {
            let z = C64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / points as f64);
            acc += f(z) * (z.powi(-(p as i32)) / points as f64);
        }
        acc
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(4, 1), vec![vec![4]]);
        assert_eq!(compositions(4, 4).len(), 1);
        assert!(compositions(2, 3).is_empty());
        // C(n−1, k−1)
        assert_eq!(compositions(6, 3).len(), 10);
    }

    #[test]
    fn low_orders_in_closed_form() {
        let h = random_hermitian(1, 3);
        let a1 = random_hermitian(2, 3);
        let a2 = random_hermitian(3, 3);
        let a1_dot = random_hermitian(4, 3);
        let a = vec![a1.clone(), a2.clone()];
        let k1 = k_coefficient(1, &a, &h).unwrap();
        assert!((k1 - linalg::commutator(&a1, &h) * I).norm() < 1e-13);
        let k2 = k_coefficient(2, &a, &h).unwrap();
        let expect = linalg::commutator(&a2, &h) * I
            + linalg::commutator(&a1, &linalg::commutator(&a1, &h)) * c(0.5);
        assert!((k2 - expect).norm() < 1e-13);
        let t2 = t_coefficient(2, 3, &a, std::slice::from_ref(&a1_dot)).unwrap();
        assert!((t2 + a1_dot).norm() < 1e-15);
        assert_eq!(t_coefficient(1, 3, &a, &[]).unwrap().norm(), 0.0);
    }

    #[test]
    fn k_series_matches_matrix_exponential() {
        let h = random_hermitian(5, 3);
        let a: Vec<Matrix> = (0..3).map(|q| random_hermitian(10 + q, 3) * c(0.5)).collect();
        let f = |eps: C64| {
            let s = &a[0] * eps + &a[1] * eps * eps + &a[2] * eps * eps * eps;
            let v = (s.clone() * I).exp();
            let v_inv = (s * (-I)).exp();
            &h - v_inv * &h * v
        };
        for p in 1..=3 {
            let oracle = taylor_coefficient(f, p, 0.2, 48);
            let got = k_coefficient(p, &a, &h).unwrap();
            assert!((&oracle - &got).norm() < 1e-10, "p = {p}: {}", (oracle - got).norm());
        }
    }

    #[test]
    fn t_series_matches_exponential_derivative() {
        // A_q(s) = B_q + s·C_q, so Ȧ_q = C_q; derivative of e^{iS} from the
        // block-triangular exponential.
        let dim = 3;
        let b: Vec<Matrix> = (0..3).map(|q| random_hermitian(20 + q, dim) * c(0.5)).collect();
        let cdot: Vec<Matrix> = (0..3).map(|q| random_hermitian(30 + q, dim) * c(0.5)).collect();
        let s0 = 0.3;
        let a: Vec<Matrix> = b.iter().zip(&cdot).map(|(b, c_)| b + c_ * c(s0)).collect();
        let f = |eps: C64| {
            let mut s = linalg::zeros(dim);
            let mut sdot = linalg::zeros(dim);
            let mut pow = eps;
            for q in 0..3 {
                s += &a[q] * pow;
                sdot += &cdot[q] * pow;
                pow *= eps;
            }
            let x = &s * I;
            let mut block = Matrix::zeros(2 * dim, 2 * dim);
            block.view_mut((0, 0), (dim, dim)).copy_from(&x);
            block.view_mut((dim, dim), (dim, dim)).copy_from(&x);
            block.view_mut((0, dim), (dim, dim)).copy_from(&(&sdot * I));
            let e = block.exp();
            let v_inv = (&s * (-I)).exp();
            let v_dot = e.view((0, dim), (dim, dim)).into_owned();
            v_inv * v_dot * (I * eps)
        };
        for p in 1..=4 {
            let oracle = taylor_coefficient(f, p, 0.2, 48);
            let got = t_coefficient(p, dim, &a, &cdot).unwrap();
            assert!((&oracle - &got).norm() < 1e-10, "p = {p}: {}", (oracle - got).norm());
        }
    }
}
