//! Truncated Taylor series ("jets") for exact derivatives of the scalar
//! drive profiles. Coefficient `k` stores `f^(k)(s) / k!`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    /// The identity map `s ↦ s` expanded at `s`.
    pub fn variable(s: f64, order: usize) -> Self {
        let mut jet = Jet::constant(s, order);
        if order >= 1 {
            jet.coeffs[1] = 1.0;
        }
        jet
    }

    pub fn zero(order: usize) -> Self {
        Jet::constant(0.0, order)
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the value");
        Jet { coeffs }
    }

    /// Builds a jet from derivative values `[f, f', f'', ...]`.
    pub fn from_derivatives(derivs: &[f64]) -> Self {
        let mut fact = 1.0;
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(k, d)| {
                if k > 0 {
                    fact *= k as f64;
                }
                d / fact
            })
            .collect();
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `f^(k)(s)`; zero beyond the truncation order.
    pub fn derivative(&self, k: usize) -> f64 {
        match self.coeffs.get(k) {
            Some(c) => c * (1..=k).map(|j| j as f64).product::<f64>(),
            None => 0.0,
        }
    }

    pub fn derivatives(&self) -> Vec<f64> {
        (0..self.coeffs.len()).map(|k| self.derivative(k)).collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn offset(&self, shift: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += shift;
        out
    }

    pub fn recip(&self) -> Self {
        let n = self.coeffs.len();
        let a = &self.coeffs;
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a[0];
        for k in 1..n {
            let acc: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -acc / a[0];
        }
        Jet { coeffs: b }
    }

    pub fn exp(&self) -> Self {
        let n = self.coeffs.len();
        let a = &self.coeffs;
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for k in 1..n {
            let acc: f64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = acc / k as f64;
        }
        Jet { coeffs: b }
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.coeffs.len();
        let a = &self.coeffs;
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for k in 1..n {
            let mut acc_s = 0.0;
            let mut acc_c = 0.0;
            for j in 1..=k {
                acc_s += j as f64 * a[j] * c[k - j];
                acc_c += j as f64 * a[j] * s[k - j];
            }
            s[k] = acc_s / k as f64;
            c[k] = -acc_c / k as f64;
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "jet orders differ");
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "jet orders differ");
        let n = self.coeffs.len();
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum())
            .collect();
        Jet { coeffs }
    }
}
