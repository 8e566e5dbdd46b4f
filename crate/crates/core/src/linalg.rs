//! Thin wrappers over nalgebra for row-major slices, plus a tridiagonal
//! solver for the reaction-diffusion stepper.

use nalgebra::{DMatrix, DVector};

/// Lower Cholesky factor of a row-major symmetric `n x n` matrix, or `None`
/// if it is not positive definite.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, a);
    let l = m.cholesky()?.unpack();
    Some(l.transpose().as_slice().to_vec())
}

/// Eigenvalues of a symmetric row-major matrix, sorted descending.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, a);
    let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// Thomas algorithm for a tridiagonal system. `lower[0]` and
/// `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = d.clone();
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Minimum-norm least-squares solution of `A x = y` for a row-major
/// `m x n` matrix.
pub fn least_squares(a: &[f64], m: usize, n: usize, y: &[f64]) -> Option<Vec<f64>> {
    let am = DMatrix::from_row_slice(m, n, a);
    let svd = am.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    let x = svd.solve(&DVector::from_column_slice(y), eps).ok()?;
    Some(x.as_slice().to_vec())
}
