mod common;

use common::{random_psd, random_shape, random_targets, rel_diff, rng};
use fimsense::linalg::{hermitian_eigenvalues, quadratic_form};
use fimsense::{
    closed_form_total_power, cumulated_power, randomize_rank1, response_matrix, solve_per_antenna_sdp, ArrayGeometry,
    Complex64, ConstraintKind, DMatrix, DVector, SurfaceShape, TargetSet,
};

/// Largest eigenvalue by power iteration (B is PSD, so it is the dominant one).
fn power_iteration(b: &DMatrix<Complex64>) -> f64 {
    let n = b.nrows();
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + i as f64 * 0.01, 0.3));
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = b * &v;
        let norm = w.norm();
        v = w / Complex64::new(norm, 0.0);
        let next = quadratic_form(b, &v);
        if (next - lambda).abs() <= 1e-14 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

#[test]
fn total_power_closed_form_matches_power_iteration() {
    let geom = ArrayGeometry::half_wavelength(10, 10, 0.0).unwrap();
    let b = response_matrix(&geom, &TargetSet::reference(), &SurfaceShape::flat(100)).unwrap().b;
    let (cov, value) = closed_form_total_power(&b, 10.0).unwrap();
    assert_eq!(cov.kind(), ConstraintKind::TotalPower);
    assert!(rel_diff(value, 10.0 * power_iteration(&b)) < 1e-9);
    let rm = response_matrix(&geom, &TargetSet::reference(), &SurfaceShape::flat(100)).unwrap();
    assert!(rel_diff(cumulated_power(&cov, &rm).unwrap(), value) < 1e-10);
}

#[test]
fn sdp_solution_is_feasible_and_certified() {
    let mut rng = rng(8);
    for n in [2, 5, 12] {
        let b = random_psd(&mut rng, n, 1 + n / 3);
        let (cov, rep) = solve_per_antenna_sdp(&b, 3.0, 1e-9).unwrap();
        let r = cov.matrix();
        for i in 0..n {
            assert!((r[(i, i)].re - 3.0 / n as f64).abs() < 1e-12);
        }
        let eig = hermitian_eigenvalues(r);
        assert!(eig[n - 1] >= -1e-10 * eig[0]);
        let bound = rep.dual_bound.unwrap();
        assert!(rep.objective <= bound * (1.0 + 1e-12));
        assert!(rep.relative_gap <= 1e-9);
        assert!(rep.objective <= 3.0 * hermitian_eigenvalues(&b)[0] * (1.0 + 1e-12));
    }
}

#[test]
fn sdp_value_is_scale_covariant() {
    let mut rng = rng(9);
    let b = random_psd(&mut rng, 6, 3);
    let (_, base) = solve_per_antenna_sdp(&b, 1.0, 1e-9).unwrap();
    let (_, scaled) = solve_per_antenna_sdp(&(&b * Complex64::new(7.0, 0.0)), 2.5, 1e-9).unwrap();
    assert!(rel_diff(scaled.objective, 17.5 * base.objective) < 1e-8);
}

#[test]
fn single_target_reaches_p_t_times_n() {
    let mut rng = rng(10);
    for (n_x, n_z) in [(2, 2), (4, 4), (10, 10)] {
        let geom = ArrayGeometry::half_wavelength(n_x, n_z, 0.5).unwrap();
        let n = n_x * n_z;
        let rm = response_matrix(&geom, &random_targets(&mut rng, 1), &random_shape(&mut rng, n, 0.5)).unwrap();
        let (_, rep) = solve_per_antenna_sdp(&rm.b, 10.0, 1e-9).unwrap();
        assert!(rel_diff(rep.objective, 10.0 * n as f64) < 1e-6, "n={n}: {}", rep.objective);
    }
}

#[test]
fn randomization_streams_are_nested() {
    let mut rng = rng(11);
    let geom = ArrayGeometry::half_wavelength(4, 4, 0.5).unwrap();
    let rm = response_matrix(&geom, &random_targets(&mut rng, 3), &SurfaceShape::flat(16)).unwrap();
    let (cov, rep) = solve_per_antenna_sdp(&rm.b, 10.0, 1e-9).unwrap();
    let mut last = f64::NEG_INFINITY;
    for samples in [1, 10, 100, 1000] {
        let (w, value) = randomize_rank1(&cov, &rm.b, samples, 99).unwrap();
        assert!(w.iter().all(|x| (x.norm() - (10.0f64 / 16.0).sqrt()).abs() < 1e-12));
        assert!(value >= last);
        assert!(value <= rep.objective * (1.0 + 1e-9));
        last = value;
    }
    let again = randomize_rank1(&cov, &rm.b, 1000, 99).unwrap();
    assert_eq!(again.1, last);
}
