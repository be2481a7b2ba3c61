//! Cumulated probing power `P_c = Σ_k a_k^H R a_k = tr(R B)` and its gradient
//! with respect to the surface shape.
//!
//! Displacing element `n` only rotates row `n` of `A`:
//! `∂A/∂Δd_n = -j 2π e_n (A_{n,:} ⊙ s)` with `s_k = sin θ_k sin φ_k`, so
//! `tr(R ∂B/∂Δd_n)` collapses to a sum over the targets of row `n` of `A`
//! against row `n` of `R A`:
//!
//! `∂P_c/∂Δd_n = -4π Σ_k s_k Im(conj(A_nk) (R A)_nk)`.
//!
//! One product `R A` (O(N_t² K)) therefore yields the whole gradient.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array::{response_matrix, steering_matrix, ArrayGeometry, ResponseMatrix, SurfaceShape, TargetSet};
use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg::trace_of_product;

/// Objective value in mW with an optional gradient in mW per wavelength of
/// displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: Option<DVector<f64>>,
}

fn check_dims(r: &CovarianceMatrix, n: usize) -> Result<()> {
    if r.dim() != n {
        return Err(Error::DimensionMismatch { what: "covariance vs array", expected: n, got: r.dim() });
    }
    Ok(())
}

/// `tr(R B)` in mW.
pub fn cumulated_power(r: &CovarianceMatrix, rm: &ResponseMatrix) -> Result<f64> {
    check_dims(r, rm.num_elements())?;
    Ok(trace_of_product(r.matrix(), &rm.b).re.max(0.0))
}

/// Value (and optionally gradient) straight from the shape, without forming `B`.
pub fn evaluate(
    r: &CovarianceMatrix,
    geom: &ArrayGeometry,
    targets: &TargetSet,
    shape: &SurfaceShape,
    with_gradient: bool,
) -> Result<ObjectiveEval> {
    check_dims(r, geom.num_elements())?;
    if shape.len() != geom.num_elements() {
        return Err(Error::DimensionMismatch {
            what: "surface shape",
            expected: geom.num_elements(),
            got: shape.len(),
        });
    }
    let (value, gradient) = power_and_gradient(r.matrix(), geom, targets, shape.as_vector(), with_gradient);
    Ok(ObjectiveEval { value, gradient })
}

pub fn gradient_shape(
    r: &CovarianceMatrix,
    geom: &ArrayGeometry,
    targets: &TargetSet,
    shape: &SurfaceShape,
) -> Result<DVector<f64>> {
    Ok(evaluate(r, geom, targets, shape, true)?.gradient.expect("gradient requested"))
}

/// Central differences of [`cumulated_power`], one coordinate at a time.
pub fn finite_difference_gradient(
    r: &CovarianceMatrix,
    geom: &ArrayGeometry,
    targets: &TargetSet,
    shape: &SurfaceShape,
    h: f64,
) -> Result<DVector<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("finite-difference step {h} must be positive")));
    }
    let n = geom.num_elements();
    check_dims(r, n)?;
    let base = shape.as_vector();
    let mut grad = DVector::zeros(n);
    for i in 0..n {
        let mut plus = base.clone();
        plus[i] += h;
        let mut minus = base.clone();
        minus[i] -= h;
        let fp = cumulated_power(r, &response_matrix(geom, targets, &SurfaceShape::new(plus))?)?;
        let fm = cumulated_power(r, &response_matrix(geom, targets, &SurfaceShape::new(minus))?)?;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    Ok(grad)
}

/// `Σ_k |a_k^H w|²` for phased-array weights `w`, mW.
pub fn weights_power(
    w: &DVector<Complex64>,
    geom: &ArrayGeometry,
    targets: &TargetSet,
    shape: &SurfaceShape,
) -> Result<f64> {
    if w.len() != geom.num_elements() {
        return Err(Error::DimensionMismatch { what: "weights vs array", expected: geom.num_elements(), got: w.len() });
    }
    if shape.len() != geom.num_elements() {
        return Err(Error::DimensionMismatch {
            what: "surface shape",
            expected: geom.num_elements(),
            got: shape.len(),
        });
    }
    let a = steering_matrix(geom, targets, shape.as_vector());
    Ok((a.adjoint() * w).iter().map(|v| v.norm_sqr()).sum())
}

pub(crate) fn power_and_gradient(
    r: &DMatrix<Complex64>,
    geom: &ArrayGeometry,
    targets: &TargetSet,
    shape: &DVector<f64>,
    with_gradient: bool,
) -> (f64, Option<DVector<f64>>) {
    let a = steering_matrix(geom, targets, shape);
    let ra = r * &a;
    let mut value = 0.0;
    for (x, y) in a.iter().zip(ra.iter()) {
        value += (x.conj() * y).re;
    }
    let gradient = with_gradient.then(|| {
        let s: Vec<f64> = targets.iter().map(|t| t.normal_projection()).collect();
        DVector::from_fn(a.nrows(), |n, _| {
            let mut acc = 0.0;
            for (k, sk) in s.iter().enumerate() {
                acc += sk * (a[(n, k)].conj() * ra[(n, k)]).im;
            }
            -2.0 * TAU * acc
        })
    });
    (value.max(0.0), gradient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::Target;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Builds `∂A` and `∂B` densely and evaluates `tr(R ∂B)` entry by entry.
    fn dense_gradient(
        r: &DMatrix<Complex64>,
        geom: &ArrayGeometry,
        targets: &TargetSet,
        shape: &SurfaceShape,
    ) -> (DVector<f64>, f64) {
        let rm = response_matrix(geom, targets, shape).unwrap();
        let n = geom.num_elements();
        let k = targets.len();
        let s: Vec<f64> = targets.iter().map(|t| t.normal_projection()).collect();
        let mut worst_imag = 0.0f64;
        let grad = DVector::from_fn(n, |row, _| {
            let mut da = DMatrix::<Complex64>::zeros(n, k);
            for col in 0..k {
                da[(row, col)] = Complex64::new(0.0, -TAU) * rm.a[(row, col)] * s[col];
            }
            let db = &da * rm.a.adjoint() + &rm.a * da.adjoint();
            let t = (r * db).trace();
            worst_imag = worst_imag.max(t.im.abs() / t.re.abs().max(1e-300));
            t.re
        });
        (grad, worst_imag)
    }

    fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        &g * g.adjoint()
    }

    #[test]
    fn sparse_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let geom = ArrayGeometry::half_wavelength(3, 2, 0.5).unwrap();
        let targets = TargetSet::from_degrees(&[(30.0, 60.0), (80.0, 20.0), (120.0, 150.0)]).unwrap();
        for _ in 0..10 {
            let r = random_psd(6, &mut rng);
            let shape = SurfaceShape::from_vec((0..6).map(|_| rng.random::<f64>() - 0.5).collect());
            let (dense, imag) = dense_gradient(&r, &geom, &targets, &shape);
            let (_, fast) = power_and_gradient(&r, &geom, &targets, shape.as_vector(), true);
            let fast = fast.unwrap();
            assert!(imag < 1e-10);
            for i in 0..6 {
                assert!((dense[i] - fast[i]).abs() <= 1e-12 * dense.amax().max(1.0), "{} vs {}", dense[i], fast[i]);
            }
        }
    }

    #[test]
    fn zero_gradient_when_targets_in_plane() {
        let geom = ArrayGeometry::half_wavelength(3, 3, 0.5).unwrap();
        let targets = TargetSet::new(vec![Target::from_degrees(50.0, 0.0), Target::from_degrees(0.0, 40.0)]).unwrap();
        let r = CovarianceMatrix::isotropic(9, 10.0);
        let shape = SurfaceShape::from_vec((0..9).map(|i| 0.05 * i as f64).collect());
        let g = gradient_shape(&r, &geom, &targets, &shape).unwrap();
        assert!(g.amax() < 1e-12);
        let fd = finite_difference_gradient(&r, &geom, &targets, &shape, 1e-6).unwrap();
        assert!(fd.amax() < 1e-6);
    }

    #[test]
    fn isotropic_power_is_pt_times_k() {
        let geom = ArrayGeometry::half_wavelength(4, 5, 0.5).unwrap();
        let targets = TargetSet::reference();
        let r = CovarianceMatrix::isotropic(20, 10.0);
        let rm = response_matrix(&geom, &targets, &SurfaceShape::flat(20)).unwrap();
        assert!((cumulated_power(&r, &rm).unwrap() - 30.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_mismatched_covariance() {
        let geom = ArrayGeometry::half_wavelength(2, 2, 0.5).unwrap();
        let rm = response_matrix(&geom, &TargetSet::reference(), &SurfaceShape::flat(4)).unwrap();
        let r = CovarianceMatrix::isotropic(5, 1.0);
        assert!(matches!(cumulated_power(&r, &rm), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_nonpositive_step() {
        let geom = ArrayGeometry::half_wavelength(2, 2, 0.5).unwrap();
        let r = CovarianceMatrix::isotropic(4, 1.0);
        assert!(finite_difference_gradient(&r, &geom, &TargetSet::reference(), &SurfaceShape::flat(4), 0.0).is_err());
    }
}
