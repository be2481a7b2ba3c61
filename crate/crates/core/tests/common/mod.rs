#![allow(dead_code)]

use fimsense::{Complex64, ConstraintKind, CovarianceMatrix, DMatrix, SurfaceShape, Target, TargetSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// `G G^H` with `G` an `n x rank` complex Gaussian matrix.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<Complex64> {
    let g = complex_gaussian(rng, n, rank);
    &g * g.adjoint()
}

/// Random full-rank covariance meeting the per-antenna constraint exactly.
pub fn random_covariance(rng: &mut ChaCha8Rng, n: usize, p_t: f64) -> CovarianceMatrix {
    let x = random_psd(rng, n, n + 2);
    let d: Vec<f64> = (0..n).map(|i| (p_t / n as f64 / x[(i, i)].re).sqrt()).collect();
    let mut r = DMatrix::from_fn(n, n, |i, j| x[(i, j)] * (d[i] * d[j]));
    for i in 0..n {
        r[(i, i)] = Complex64::new(p_t / n as f64, 0.0);
    }
    CovarianceMatrix::new(r, p_t, ConstraintKind::PerAntenna).unwrap()
}

/// Directions drawn away from the poles and the array plane edges.
pub fn random_targets(rng: &mut ChaCha8Rng, k: usize) -> TargetSet {
    let targets = (0..k).map(|_| Target::new(rng.random_range(0.1..3.04), rng.random_range(0.1..3.04))).collect();
    TargetSet::new(targets).unwrap()
}

pub fn random_shape(rng: &mut ChaCha8Rng, n: usize, d_max: f64) -> SurfaceShape {
    SurfaceShape::from_vec((0..n).map(|_| rng.random_range(-d_max..=d_max)).collect())
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
