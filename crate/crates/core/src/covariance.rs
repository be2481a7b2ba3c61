//! Transmit covariance subproblem.
//!
//! For a fixed shape the covariance block is the SDP
//!
//! ```text
//! maximize  tr(R B)   s.t.  diag(R) = P_t / N_t,  R ⪰ 0
//! ```
//!
//! with dual `minimize (P_t/N_t) Σ y_n  s.t.  Diag(y) ⪰ B`. It is solved with a
//! primal-dual interior-point method (HRVW/KSH search direction with a
//! Mehrotra predictor-corrector), which keeps the dual iterate strictly
//! feasible, so every returned solution carries a dual upper bound.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array::ResponseMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    check_hermitian_psd, hermitian_deviation, hermitian_eigen, hermitian_eigenvalues, hermitize, max_abs,
    quadratic_form, trace_of_product,
};

/// Default relative duality gap for [`solve_per_antenna_sdp`].
pub const DEFAULT_SDP_TOL: f64 = 1e-9;
/// Interior-point iteration cap.
pub const MAX_SDP_ITERS: usize = 500;
/// Default number of Gaussian randomization draws.
pub const DEFAULT_RANDOMIZATION_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// `diag(R) = P_t / N_t`.
    PerAntenna,
    /// `tr(R) = P_t`.
    TotalPower,
}

/// A feasible transmit covariance (Hermitian, PSD, power constraint met).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    r: DMatrix<Complex64>,
    power_budget: f64,
    kind: ConstraintKind,
}

impl CovarianceMatrix {
    pub fn new(r: DMatrix<Complex64>, power_budget: f64, kind: ConstraintKind) -> Result<Self> {
        if !(power_budget > 0.0 && power_budget.is_finite()) {
            return Err(Error::InvalidInput(format!("power budget {power_budget} mW must be positive")));
        }
        if !r.is_square() || r.nrows() == 0 {
            return Err(Error::DimensionMismatch { what: "covariance", expected: r.nrows(), got: r.ncols() });
        }
        let dev = hermitian_deviation(&r);
        if dev >= 1e-10 * max_abs(&r).max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        let n = r.nrows();
        match kind {
            ConstraintKind::PerAntenna => {
                let target = power_budget / n as f64;
                if let Some(i) = (0..n).find(|&i| (r[(i, i)].re - target).abs() > 1e-8 * target) {
                    return Err(Error::Infeasible(format!(
                        "diagonal entry {i} is {} mW, expected {target} mW",
                        r[(i, i)].re
                    )));
                }
            }
            ConstraintKind::TotalPower => {
                let tr = r.trace().re;
                if (tr - power_budget).abs() > 1e-8 * power_budget {
                    return Err(Error::Infeasible(format!("trace is {tr} mW, expected {power_budget} mW")));
                }
            }
        }
        let ev = hermitian_eigenvalues(&r);
        let (max, min) = (ev[0], ev[n - 1]);
        if min < -1e-8 * max {
            return Err(Error::NotPsd { min, max });
        }
        Ok(Self { r: hermitize(&r), power_budget, kind })
    }

    /// `(P_t / N_t) I`, feasible for both constraint kinds.
    pub fn isotropic(n: usize, power_budget: f64) -> Self {
        let r = DMatrix::from_diagonal_element(n, n, Complex64::new(power_budget / n as f64, 0.0));
        Self { r, power_budget, kind: ConstraintKind::PerAntenna }
    }

    /// `w w^H` for phased-array weights with `|w_n|² = P_t / N_t`.
    pub fn from_weights(w: &DVector<Complex64>, power_budget: f64) -> Result<Self> {
        Self::new(w * w.adjoint(), power_budget, ConstraintKind::PerAntenna)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.r
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `tr(R B)` of the returned covariance, mW.
    pub objective: f64,
    pub iterations: usize,
    /// Largest relative diagonal deviation of the raw iterate before the final
    /// diagonal rescaling.
    pub primal_residual: f64,
    /// `(dual_bound - objective) / dual_bound`.
    pub relative_gap: f64,
    /// Certified upper bound on the optimum, mW.
    pub dual_bound: Option<f64>,
}

/// Solves the per-antenna SDP to a relative duality gap of `tol`.
pub fn solve_per_antenna_sdp(b: &DMatrix<Complex64>, p_t: f64, tol: f64) -> Result<(CovarianceMatrix, SolveReport)> {
    if !(p_t > 0.0 && p_t.is_finite()) {
        return Err(Error::InvalidInput(format!("transmit power {p_t} mW must be positive")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    check_hermitian_psd(b, "correlation matrix")?;
    let n = b.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("empty correlation matrix".into()));
    }
    let per_antenna = p_t / n as f64;
    let scale = max_abs(b);
    if scale == 0.0 {
        let r = CovarianceMatrix::isotropic(n, p_t);
        let report = SolveReport {
            objective: 0.0,
            iterations: 0,
            primal_residual: 0.0,
            relative_gap: 0.0,
            dual_bound: Some(0.0),
        };
        return Ok((r, report));
    }
    let bs = hermitize(b) / Complex64::new(scale, 0.0);
    let sol = interior_point(&bs, tol)?;
    let unit = per_antenna * scale;
    let r = sol.x * Complex64::new(per_antenna, 0.0);
    let cov = CovarianceMatrix::new(hermitize(&r), p_t, ConstraintKind::PerAntenna)?;
    let report = SolveReport {
        objective: sol.primal * unit,
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        relative_gap: sol.relative_gap,
        dual_bound: Some(sol.dual * unit),
    };
    Ok((cov, report))
}

struct IpmSolution {
    x: DMatrix<Complex64>,
    primal: f64,
    dual: f64,
    relative_gap: f64,
    primal_residual: f64,
    iterations: usize,
}

fn diag_times(x: &DMatrix<Complex64>, d: &DVector<f64>, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    // x * Diag(d) * rhs
    let mut scaled = x.clone();
    for (j, dj) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*dj);
    }
    scaled * rhs
}

fn with_diag(b: &DMatrix<Complex64>, y: &DVector<f64>) -> DMatrix<Complex64> {
    let mut z = -b;
    for (i, yi) in y.iter().enumerate() {
        z[(i, i)] += Complex64::new(*yi, 0.0);
    }
    z
}

/// Largest `α` with `chol.L chol.L^H + α d ⪰ 0` (infinite when `d ⪰ 0`).
fn max_step(chol: &Cholesky<Complex64, nalgebra::Dyn>, d: &DMatrix<Complex64>) -> f64 {
    let l = chol.l();
    let left = l.solve_lower_triangular(d).expect("nonsingular factor");
    let w = l.solve_lower_triangular(&left.adjoint()).expect("nonsingular factor");
    let ev = hermitian_eigenvalues(&w);
    let min = ev[ev.len() - 1];
    if min < 0.0 {
        -1.0 / min
    } else {
        f64::INFINITY
    }
}

fn diag_step(chol_z: &Cholesky<Complex64, nalgebra::Dyn>, dy: &DVector<f64>) -> f64 {
    let d = DMatrix::from_diagonal(&dy.map(|v| Complex64::new(v, 0.0)));
    max_step(chol_z, &d)
}

/// Primal: max tr(B X) s.t. diag(X) = 1, X ⪰ 0. Dual: min Σ y s.t. Diag(y) - B ⪰ 0.
///
/// The optimum is often not unique (the optimal face has positive
/// dimension). Once the gap target is met, pure centering steps pull the
/// iterate onto the central path, so the returned point approximates the
/// analytic center of the optimal face rather than an arbitrary optimal point.
fn interior_point(b: &DMatrix<Complex64>, tol: f64) -> Result<IpmSolution> {
    let n = b.nrows();
    let nf = n as f64;
    let mut x = DMatrix::<Complex64>::identity(n, n);
    let mut y = DVector::from_fn(n, |i, _| 1.1 * b.row(i).iter().map(|v| v.norm()).sum::<f64>() + 1e-3);
    let ones = DVector::from_element(n, 1.0);
    let mut gap = f64::INFINITY;
    let mut centering_steps = 0;

    for iter in 0..MAX_SDP_ITERS {
        let prev_gap = gap;
        let fail = || Error::SolverFailure { iterations: iter, gap: prev_gap, tol };
        let z = with_diag(b, &y);
        let chol_z = Cholesky::new(z.clone()).ok_or_else(fail)?;
        let chol_x = Cholesky::new(x.clone()).ok_or_else(fail)?;
        let mu = trace_of_product(&x, &z).re / nf;

        let (primal, residual, x_feasible) = rescaled_primal(b, &x);
        let dual = y.sum();
        gap = (dual - primal) / dual.abs().max(f64::MIN_POSITIVE);
        let centering = gap <= tol;
        if centering && (centering_steps >= MAX_CENTERING_STEPS || centrality(&chol_x, &z, mu) <= CENTRALITY_TOL) {
            return Ok(IpmSolution {
                x: x_feasible,
                primal,
                dual,
                relative_gap: gap.max(0.0),
                primal_residual: residual,
                iterations: iter,
            });
        }

        let zi = hermitize(&chol_z.inverse());
        let schur = DMatrix::from_fn(n, n, |i, j| (x[(i, j)] * zi[(j, i)]).re);
        let chol_m = Cholesky::new(schur).ok_or_else(fail)?;

        let (sigma, cross) = if centering {
            centering_steps += 1;
            (1.0, None)
        } else {
            // Predictor (affine scaling).
            let dy_aff = chol_m.solve(&(-&ones));
            let dx_aff = hermitize(&(-&x - diag_times(&x, &dy_aff, &zi)));
            let ap = max_step(&chol_x, &dx_aff).min(1.0);
            let ad = diag_step(&chol_z, &dy_aff).min(1.0);
            let x_aff = &x + &dx_aff * Complex64::new(ap, 0.0);
            let z_aff = with_diag(b, &(&y + &dy_aff * ad));
            let mu_aff = trace_of_product(&x_aff, &z_aff).re / nf;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            (sigma, Some(diag_times(&dx_aff, &dy_aff, &zi)))
        };

        // Corrector (or centering) direction.
        let rhs = DVector::from_fn(n, |i, _| {
            let second_order = cross.as_ref().map_or(0.0, |c| c[(i, i)].re);
            sigma * mu * zi[(i, i)].re - 1.0 - second_order
        });
        let dy = chol_m.solve(&rhs);
        let mut dx = &zi * Complex64::new(sigma * mu, 0.0) - &x - diag_times(&x, &dy, &zi);
        if let Some(c) = cross {
            dx -= c;
        }
        let dx = hermitize(&dx);
        let ap = (STEP_FRACTION * max_step(&chol_x, &dx)).min(1.0);
        let ad = (STEP_FRACTION * diag_step(&chol_z, &dy)).min(1.0);
        x += &dx * Complex64::new(ap, 0.0);
        x = hermitize(&x);
        y += &dy * ad;
    }
    Err(Error::SolverFailure { iterations: MAX_SDP_ITERS, gap, tol })
}

const STEP_FRACTION: f64 = 0.95;
const MAX_CENTERING_STEPS: usize = 20;
const CENTRALITY_TOL: f64 = 1e-3;

/// `‖L^H Z L / μ - I‖_F` with `X = L L^H`.
fn centrality(chol_x: &Cholesky<Complex64, nalgebra::Dyn>, z: &DMatrix<Complex64>, mu: f64) -> f64 {
    let l = chol_x.l();
    let mut w = l.adjoint() * z * &l / Complex64::new(mu, 0.0);
    for i in 0..w.nrows() {
        w[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    w.norm()
}

/// Rescales `x` to unit diagonal (`D x D`) and returns `(tr(B D x D), residual, D x D)`.
fn rescaled_primal(b: &DMatrix<Complex64>, x: &DMatrix<Complex64>) -> (f64, f64, DMatrix<Complex64>) {
    let n = x.nrows();
    let mut residual = 0.0f64;
    let d = DVector::from_fn(n, |i, _| {
        let xi = x[(i, i)].re;
        residual = residual.max((xi - 1.0).abs());
        1.0 / xi.max(f64::MIN_POSITIVE).sqrt()
    });
    let mut xs = x.clone();
    for j in 0..n {
        for i in 0..n {
            xs[(i, j)] *= d[i] * d[j];
        }
        xs[(j, j)] = Complex64::new(1.0, 0.0);
    }
    (trace_of_product(b, &xs).re, residual, xs)
}

/// Total-power optimum `R = P_t u u^H` along the principal eigenvector of `B`;
/// returns it with the achieved power `P_t λ_max(B)`.
pub fn closed_form_total_power(b: &DMatrix<Complex64>, p_t: f64) -> Result<(CovarianceMatrix, f64)> {
    if !(p_t > 0.0 && p_t.is_finite()) {
        return Err(Error::InvalidInput(format!("transmit power {p_t} mW must be positive")));
    }
    check_hermitian_psd(b, "correlation matrix")?;
    let (values, vectors) = hermitian_eigen(b);
    let u = vectors.column(0).into_owned();
    let r = &u * u.adjoint() * Complex64::new(p_t, 0.0);
    let cov = CovarianceMatrix::new(hermitize(&r), p_t, ConstraintKind::TotalPower)?;
    Ok((cov, p_t * values[0]))
}

/// Gaussian randomization: draws `ξ ~ CN(0, R)`, maps each draw to the
/// constant-modulus weights `w_n = sqrt(P_t/N_t) e^{j arg ξ_n}` and keeps the
/// best `w^H B w`.
///
/// Draws come from one ChaCha8 stream seeded with `seed`, so a larger
/// `n_samples` evaluates a superset of the candidates of a smaller one.
pub fn randomize_rank1(
    r: &CovarianceMatrix,
    b: &DMatrix<Complex64>,
    n_samples: usize,
    seed: u64,
) -> Result<(DVector<Complex64>, f64)> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("randomization needs at least one sample".into()));
    }
    if r.kind() != ConstraintKind::PerAntenna {
        return Err(Error::Infeasible("randomization expects a per-antenna covariance".into()));
    }
    let n = r.dim();
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch { what: "correlation vs covariance", expected: n, got: b.nrows() });
    }
    let (values, vectors) = hermitian_eigen(r.matrix());
    if !(values[0] > 1e-12 * r.power_budget()) {
        return Err(Error::Infeasible("covariance is numerically zero".into()));
    }
    let kept: Vec<usize> = (0..n).filter(|&i| values[i] > 1e-12 * values[0]).collect();
    let factor = DMatrix::from_fn(n, kept.len(), |row, c| vectors[(row, kept[c])] * values[kept[c]].sqrt());

    let amplitude = (r.power_budget() / n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(DVector<Complex64>, f64)> = None;
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..n_samples {
        let z = DVector::from_fn(kept.len(), |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * half, im * half)
        });
        let xi = &factor * z;
        let w = xi.map(|v| Complex64::from_polar(amplitude, v.arg()));
        let value = quadratic_form(b, &w);
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((w, value));
        }
    }
    Ok(best.expect("n_samples >= 1"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    /// Eigenvalues of `B`, descending, clamped at zero.
    pub eigenvalues: DVector<f64>,
    /// `|Σ λ - K N_t|`.
    pub trace_check: f64,
    /// Eigenvalues above `1e-8 λ_max`.
    pub rank: usize,
}

pub fn rank_profile(rm: &ResponseMatrix) -> RankProfile {
    let eigenvalues = hermitian_eigenvalues(&rm.b).map(|v| v.max(0.0));
    let expected = (rm.num_targets() * rm.num_elements()) as f64;
    let trace_check = (eigenvalues.sum() - expected).abs();
    let cutoff = 1e-8 * eigenvalues[0];
    let rank = eigenvalues.iter().filter(|&&v| v > cutoff).count();
    RankProfile { eigenvalues, trace_check, rank }
}
