//! Least-squares fits of eigenvalue tails.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Largest absolute residual.
    pub max_residual: f64,
    /// Heteroscedasticity-consistent standard errors; zero when n = p.
    pub std_errors: Vec<f64>,
}

/// Solves min ‖A c − y‖ by SVD; `rows` are the rows of A.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n < p || p == 0 {
        return Err(Error::WindowTooSmall { usable: n, needed: p.max(1) });
    }
    let a = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    // column scaling keeps j^{-n} columns comparable
    let scales: Vec<f64> = (0..p).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    let scaled = DMatrix::from_fn(n, p, |i, j| a[(i, j)] / scales[j]);
    let svd = scaled.svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Degenerate(format!("least squares failed: {e}")))?;
    let coefficients: Vec<f64> = (0..p).map(|j| c[j] / scales[j]).collect();
    let residuals: Vec<f64> = (0..n)
        .map(|i| rows[i].iter().zip(&coefficients).map(|(a, c)| a * c).sum::<f64>() - y[i])
        .collect();
    let max_residual = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    // heteroscedasticity-consistent (HC1): Var c = M diag(r²) Mᵀ · n/(n − p)
    // with M = V Σ⁻¹ Uᵀ, since tail residuals shrink along the window
    let dof = if n > p { n as f64 / (n - p) as f64 } else { 0.0 };
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    let floor = 1e-14 * svd.singular_values.max();
    let std_errors = (0..p)
        .map(|j| {
            let var: f64 = (0..n)
                .map(|i| {
                    let m: f64 = (0..svd.singular_values.len())
                        .filter(|&k| svd.singular_values[k] > floor)
                        .map(|k| v_t[(k, j)] / svd.singular_values[k] * u[(i, k)])
                        .sum();
                    (m * residuals[i]).powi(2)
                })
                .sum();
            (var * dof).sqrt() / scales[j]
        })
        .collect();
    Ok(LinearFit {
        coefficients,
        max_residual,
        std_errors,
    })
}

/// Polynomial fit Σ_{k ≤ degree} c_k x^k.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<LinearFit> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&x| (0..=degree).map(|k| x.powi(k as i32)).collect()).collect();
    least_squares(&rows, y)
}

/// Fits σ_j − jα ≈ Σ_{n=1}^{terms} s_n j^{−n} and returns (s_1, …, s_terms).
pub fn fit_tail_coefficients(j: &[f64], sigma: &[f64], alpha: f64, terms: usize) -> Result<LinearFit> {
    let rows: Vec<Vec<f64>> = j.iter().map(|&j| (1..=terms).map(|n| j.powi(-(n as i32))).collect()).collect();
    let y: Vec<f64> = j.iter().zip(sigma).map(|(j, s)| s - j * alpha).collect();
    least_squares(&rows, &y)
}
