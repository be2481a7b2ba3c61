//! Small dense helpers for complex Hermitian matrices.
//!
//! Eigen-decompositions are delegated to `nalgebra`'s Hermitian solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max-entry magnitude of `m - m^H`.
pub fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// `(m + m^H) / 2`.
pub fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut out = m.clone();
    let n = m.nrows();
    for i in 0..n {
        out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let eig = hermitize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> DVector<f64> {
    let mut values: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    DVector::from_vec(values)
}

/// Rejects matrices that are not Hermitian (relative to their scale) or that
/// have an eigenvalue below `-1e-8 * lambda_max`.
pub fn check_hermitian_psd(m: &DMatrix<Complex64>, what: &'static str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { what, expected: m.nrows(), got: m.ncols() });
    }
    let scale = max_abs(m).max(1.0);
    let dev = hermitian_deviation(m);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian(dev));
    }
    if m.nrows() == 0 {
        return Ok(());
    }
    let ev = hermitian_eigenvalues(m);
    let max = ev[0];
    let min = ev[ev.len() - 1];
    if min < -1e-8 * max.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd { min, max });
    }
    Ok(())
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `v^H m v`, real part.
pub fn quadratic_form(m: &DMatrix<Complex64>, v: &DVector<Complex64>) -> f64 {
    let mv = m * v;
    v.iter().zip(mv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}
