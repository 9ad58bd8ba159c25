//! Chebyshev–Lobatto nodes on `[0, 1]` and spectral differentiation of
//! matrix-valued functions sampled on them.

use crate::error::{Error, Result};
use crate::linalg::{c, Matrix};

pub const DEFAULT_NODES: usize = 33;

#[derive(Debug, Clone)]
pub struct ChebyshevGrid {
    nodes: Vec<f64>,
    diff: Vec<Vec<f64>>,
}

impl ChebyshevGrid {
    /// `count` nodes `s_j = (1 − cos(πj/N))/2`, `N = count − 1`, so the
    /// first node is 0 and the last is 1.
    pub fn new(count: usize) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 Chebyshev nodes, got {count}"
            )));
        }
        let n = count - 1;
        let x: Vec<f64> = (0..=n)
            .map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        let weight = |j: usize| {
            let base = if j == 0 || j == n { 2.0 } else { 1.0 };
            if j.is_multiple_of(2) {
                base
            } else {
                -base
            }
        };
        let mut dx = vec![vec![0.0; count]; count];
        for i in 0..count {
            for j in 0..count {
                if i != j {
                    dx[i][j] = weight(i) / weight(j) / (x[i] - x[j]);
                }
            }
            dx[i][i] = -dx[i].iter().sum::<f64>();
        }
        // s = (1 − x)/2 ⇒ d/ds = −2 d/dx
        let diff = dx
            .into_iter()
            .map(|row| row.into_iter().map(|v| -2.0 * v).collect())
            .collect();
        let nodes = x.iter().map(|v| 0.5 * (1.0 - v)).collect();
        Ok(ChebyshevGrid { nodes, diff })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the node closest to `s`.
    pub fn nearest(&self, s: f64) -> usize {
        self.nodes
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - s).abs().total_cmp(&(b.1 - s).abs()))
            .map(|(j, _)| j)
            .expect("nonempty grid")
    }

    pub fn differentiate_scalar(&self, values: &[f64]) -> Vec<f64> {
        self.diff
            .iter()
            .map(|row| row.iter().zip(values).map(|(d, v)| d * v).sum())
            .collect()
    }

    pub fn differentiate(&self, values: &[Matrix]) -> Result<Vec<Matrix>> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: values.len(),
            });
        }
        let shape = values[0].shape();
        Ok(self
            .diff
            .iter()
            .map(|row| {
                let mut acc = Matrix::zeros(shape.0, shape.1);
                for (d, v) in row.iter().zip(values) {
                    if *d != 0.0 {
                        acc += v * c(*d);
                    }
                }
                acc
            })
            .collect())
    }
}
