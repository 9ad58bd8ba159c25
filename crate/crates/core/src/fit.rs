//! Least-squares fits used by the scaling experiments.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Half-width of the 95% confidence interval on the slope; `NaN` with
    /// only two points.
    pub slope_ci95: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidParameter("a line needs at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("fit data must be finite".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    let slope_ci95 = if n > 2 {
        let dof = nf - 2.0;
        let t = StudentsT::new(0.0, 1.0, dof)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .inverse_cdf(0.975);
        t * (ss_res / dof / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_ci95,
        points: n,
    })
}

/// Fit of `log y` against `log x`; all values must be positive.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.iter().chain(y).any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter(
            "log-log fit requires positive data".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    /// `‖y − Xβ‖ / ‖y − ȳ‖`.
    pub relative_residual: f64,
}

/// Multi-linear least squares on the rows of a design matrix.
pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Result<LeastSquares> {
    let rows = design.len();
    if rows != y.len() {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: y.len(),
        });
    }
    let cols = design.first().map_or(0, Vec::len);
    if cols == 0 || rows < cols {
        return Err(Error::InvalidParameter(format!(
            "need at least {cols} rows for {cols} coefficients, got {rows}"
        )));
    }
    let x = DMatrix::from_fn(rows, cols, |i, j| design[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let beta = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let fitted = &x * &beta;
    let ss_res = (&b - fitted).norm_squared();
    let mean = y.iter().sum::<f64>() / rows as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let (r_squared, relative_residual) = if ss_tot == 0.0 {
        (1.0, 0.0)
    } else {
        (1.0 - ss_res / ss_tot, (ss_res / ss_tot).sqrt())
    };
    Ok(LeastSquares {
        coefficients: beta.iter().copied().collect(),
        r_squared,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let x = [0.32, 0.16, 0.08, 0.04];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        let fit = log_log_fit(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn confidence_interval_uses_student_t() {
        // residuals ±0.1 alternating on x = 0..4
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.1, 0.9, 2.1, 2.9];
        let fit = linear_fit(&x, &y).unwrap();
        // t_{0.975, 2} = 4.302652729911275
        let sxx = 5.0;
        let ss_res: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - fit.intercept - fit.slope * a).powi(2))
            .sum();
        let expect = 4.302652729911275 * (ss_res / 2.0 / sxx).sqrt();
        assert_relative_eq!(fit.slope_ci95, expect, max_relative = 1e-9);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(log_log_fit(&[1.0, -1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn plane_recovery() {
        let mut design = Vec::new();
        let mut y = Vec::new();
        for d in 1..5 {
            for t in 0..4 {
                design.push(vec![1.0, d as f64, t as f64]);
                y.push(0.5 - 1.5 * d as f64 + 0.75 * t as f64);
            }
        }
        let fit = least_squares(&design, &y).unwrap();
        assert_relative_eq!(fit.coefficients[1], -1.5, epsilon = 1e-12);
        assert_relative_eq!(fit.coefficients[2], 0.75, epsilon = 1e-12);
        assert!(fit.relative_residual < 1e-12);
    }

    proptest! {
        #[test]
        fn line_fit_recovers_noiseless_lines(a in -5.0..5.0f64, b in -5.0..5.0f64) {
            let x: Vec<f64> = (0..6).map(|v| v as f64 * 0.7).collect();
            let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
            let fit = linear_fit(&x, &y).unwrap();
            prop_assert!((fit.slope - b).abs() < 1e-10);
            prop_assert!((fit.intercept - a).abs() < 1e-10);
        }
    }
}
