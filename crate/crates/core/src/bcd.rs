//! Block coordinate ascent over (covariance, shape) and the four benchmark
//! transmitters.
//!
//! Each outer iteration solves the covariance SDP for the current shape and
//! then runs projected gradient ascent on the shape for that covariance. The
//! loop stops once the fractional increase of `P_c` drops below
//! `10^(threshold_db / 10)`. Several starts run in parallel; the flat start is
//! always among them, so the result never falls below the rigid array.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, warn};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{response_matrix, ArrayGeometry, SurfaceShape, TargetSet};
use crate::covariance::{
    randomize_rank1, solve_per_antenna_sdp, CovarianceMatrix, SolveReport, DEFAULT_RANDOMIZATION_SAMPLES,
    DEFAULT_SDP_TOL,
};
use crate::error::{Error, Result};
use crate::objective::cumulated_power;
use crate::shape::{ascend_shape, AscentConfig, AscentStatus};
use crate::units::db_to_ratio;

#[derive(Debug, Clone, PartialEq)]
pub enum InitScheme {
    /// Only the flat start.
    Zero,
    /// Flat start plus `n_starts - 1` uniform draws in `[-d_max, d_max]^N`.
    UniformBox,
    /// Flat start, then the given shapes, then uniform draws up to `n_starts`.
    Provided(Vec<SurfaceShape>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdConfig {
    pub max_outer_iters: usize,
    pub rel_increase_threshold_db: f64,
    pub ascent: AscentConfig,
    pub n_starts: usize,
    pub rng_seed: u64,
    pub init_scheme: InitScheme,
    pub sdp_tol: f64,
    pub randomization_samples: usize,
}

impl Default for BcdConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 50,
            rel_increase_threshold_db: -30.0,
            ascent: AscentConfig::default(),
            n_starts: 4,
            rng_seed: 0,
            init_scheme: InitScheme::UniformBox,
            sdp_tol: DEFAULT_SDP_TOL,
            randomization_samples: DEFAULT_RANDOMIZATION_SAMPLES,
        }
    }
}

impl BcdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 || self.n_starts == 0 || self.randomization_samples == 0 {
            return Err(Error::InvalidInput(
                "bcd config: max_outer_iters, n_starts and randomization_samples must be >= 1".into(),
            ));
        }
        if !self.rel_increase_threshold_db.is_finite() || !(self.sdp_tol > 0.0) {
            return Err(Error::InvalidInput("bcd config: threshold must be finite and sdp_tol positive".into()));
        }
        self.ascent.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    RaaPa,
    FimPa,
    RaaMimo,
    FimMimo,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::RaaPa, Scheme::FimPa, Scheme::RaaMimo, Scheme::FimMimo];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::RaaPa => "raa-pa",
            Scheme::FimPa => "fim-pa",
            Scheme::RaaMimo => "raa-mimo",
            Scheme::FimMimo => "fim-mimo",
        }
    }

    pub fn is_flexible(self) -> bool {
        matches!(self, Scheme::FimPa | Scheme::FimMimo)
    }

    pub fn is_phased(self) -> bool {
        matches!(self, Scheme::RaaPa | Scheme::FimPa)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    Threshold,
    MaxIters,
    /// The shape block left the shape unchanged, so further iterations would repeat.
    Stationary,
    /// A later covariance solve failed; the last feasible pair is returned.
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub outer: usize,
    /// Objective after the covariance block, mW.
    pub after_covariance: f64,
    /// Objective after the shape block, mW.
    pub objective: f64,
    /// Value of the rank-1 draw for this covariance (phased-array runs only).
    pub rank1_objective: Option<f64>,
    pub sdp_iterations: usize,
    pub inner_iterations: usize,
    pub inner_status: AscentStatus,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub start_index: usize,
    pub records: Vec<OuterRecord>,
    pub termination_reason: TerminationReason,
}

impl OptimizationTrace {
    pub fn outer_iterations(&self) -> usize {
        self.records.len()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }
}

#[derive(Debug, Clone)]
pub struct BcdOutcome {
    pub covariance: CovarianceMatrix,
    pub shape: SurfaceShape,
    /// `tr(R B)` of the returned pair, mW.
    pub objective: f64,
    pub trace: OptimizationTrace,
    /// Final objective of every start, in start order.
    pub start_objectives: Vec<f64>,
    /// Best phased-array weights and the shape they were evaluated on.
    pub rank1: Option<Rank1Solution>,
}

#[derive(Debug, Clone)]
pub struct Rank1Solution {
    pub weights: DVector<Complex64>,
    pub shape: SurfaceShape,
    pub value: f64,
}

/// Seed of the randomization stream used by `start` at outer iteration `outer`.
/// Start 0, iteration 0 uses `seed` itself, the stream of the rigid phased array.
pub fn randomization_seed(seed: u64, start: usize, outer: usize) -> u64 {
    seed.wrapping_add(((start as u64) << 32) | outer as u64)
}

/// Initial shapes in run order; index 0 is always the flat surface.
pub fn initial_shapes(geom: &ArrayGeometry, cfg: &BcdConfig) -> Result<Vec<SurfaceShape>> {
    let n = geom.num_elements();
    let mut starts = vec![SurfaceShape::flat(n)];
    if geom.d_max() == 0.0 {
        return Ok(starts);
    }
    match &cfg.init_scheme {
        InitScheme::Zero => return Ok(starts),
        InitScheme::UniformBox => {}
        InitScheme::Provided(shapes) => {
            for s in shapes {
                geom.validate_shape(s)?;
                starts.push(s.clone());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let d = geom.d_max();
    while starts.len() < cfg.n_starts {
        starts.push(SurfaceShape::from_vec((0..n).map(|_| rng.random_range(-d..=d)).collect()));
    }
    Ok(starts)
}

struct StartRun {
    covariance: CovarianceMatrix,
    shape: SurfaceShape,
    objective: f64,
    trace: OptimizationTrace,
    rank1: Option<Rank1Solution>,
}

fn keep_better(slot: &mut Option<Rank1Solution>, candidate: Rank1Solution) {
    if slot.as_ref().is_none_or(|s| candidate.value > s.value) {
        *slot = Some(candidate);
    }
}

fn run_start(
    geom: &ArrayGeometry,
    targets: &TargetSet,
    p_t: f64,
    cfg: &BcdConfig,
    start_index: usize,
    shape0: SurfaceShape,
    phased: bool,
) -> Result<StartRun> {
    let threshold = db_to_ratio(cfg.rel_increase_threshold_db);
    let mut shape = shape0;
    let mut covariance: Option<CovarianceMatrix> = None;
    let mut previous: Option<f64> = None;
    let mut records = Vec::new();
    let mut rank1: Option<Rank1Solution> = None;
    let mut termination = TerminationReason::MaxIters;

    for outer in 0..cfg.max_outer_iters {
        let started = Instant::now();
        let rm = response_matrix(geom, targets, &shape)?;
        let solved = solve_per_antenna_sdp(&rm.b, p_t, cfg.sdp_tol);
        let (fresh, report) = match (solved, &covariance) {
            (Ok(pair), _) => pair,
            (Err(e @ Error::SolverFailure { .. }), Some(_)) => {
                warn!("start {start_index}: covariance solve failed at outer iteration {outer}: {e}");
                termination = TerminationReason::SolverFailure;
                break;
            }
            (Err(e), _) => return Err(e),
        };
        // Keep the previous covariance if it still beats the new solve on this shape.
        let fresh_value = cumulated_power(&fresh, &rm)?;
        let (cov, after_covariance) = match covariance.take() {
            Some(old) => {
                let old_value = cumulated_power(&old, &rm)?;
                if old_value > fresh_value {
                    (old, old_value)
                } else {
                    (fresh, fresh_value)
                }
            }
            None => (fresh, fresh_value),
        };

        let mut iteration_rank1 = None;
        if phased {
            let seed = randomization_seed(cfg.rng_seed, start_index, outer);
            let (weights, value) = randomize_rank1(&cov, &rm.b, cfg.randomization_samples, seed)?;
            iteration_rank1 = Some(value);
            keep_better(&mut rank1, Rank1Solution { weights, shape: shape.clone(), value });
        }

        let (next_shape, ascent) = ascend_shape(&cov, geom, targets, &shape, &cfg.ascent)?;
        let objective = ascent.final_value();

        let stationary = next_shape == shape;
        shape = next_shape;
        covariance = Some(cov);
        records.push(OuterRecord {
            outer,
            after_covariance,
            objective,
            rank1_objective: iteration_rank1,
            sdp_iterations: report.iterations,
            inner_iterations: ascent.iterations,
            inner_status: ascent.status,
            elapsed_s: started.elapsed().as_secs_f64(),
        });
        debug!(
            "start {start_index} outer {outer}: {after_covariance:.6} -> {objective:.6} mW ({} inner, {:?})",
            ascent.iterations, ascent.status
        );

        if let Some(prev) = previous {
            if (objective - prev) / prev < threshold {
                termination = TerminationReason::Threshold;
                break;
            }
        }
        if stationary {
            termination = TerminationReason::Stationary;
            break;
        }
        previous = Some(objective);
    }

    let covariance = covariance.expect("at least one outer iteration ran");
    let objective = cumulated_power(&covariance, &response_matrix(geom, targets, &shape)?)?;
    Ok(StartRun {
        covariance,
        shape,
        objective,
        trace: OptimizationTrace { start_index, records, termination_reason: termination },
        rank1,
    })
}

fn run_bcd(geom: &ArrayGeometry, targets: &TargetSet, p_t: f64, cfg: &BcdConfig, phased: bool) -> Result<BcdOutcome> {
    cfg.validate()?;
    let starts = initial_shapes(geom, cfg)?;
    let runs: Vec<StartRun> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| run_start(geom, targets, p_t, cfg, i, s, phased))
        .collect::<Result<_>>()?;
    let start_objectives: Vec<f64> = runs.iter().map(|r| r.objective).collect();
    let score =
        |r: &StartRun| if phased { r.rank1.as_ref().map_or(f64::NEG_INFINITY, |s| s.value) } else { r.objective };
    // Ties go to the lowest start index.
    let best =
        runs.into_iter().reduce(|best, r| if score(&r) > score(&best) { r } else { best }).expect("at least one start");
    Ok(BcdOutcome {
        covariance: best.covariance,
        shape: best.shape,
        objective: best.objective,
        trace: best.trace,
        start_objectives,
        rank1: best.rank1,
    })
}

/// Joint covariance/shape optimization (MIMO transmitter).
pub fn bcd_optimize(geom: &ArrayGeometry, targets: &TargetSet, p_t: f64, cfg: &BcdConfig) -> Result<BcdOutcome> {
    run_bcd(geom, targets, p_t, cfg, false)
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub scheme: Scheme,
    /// Transmit covariance; `w w^H` for the phased-array schemes.
    pub covariance: CovarianceMatrix,
    pub shape: SurfaceShape,
    /// Cumulated power of `(covariance, shape)`, mW.
    pub objective: f64,
    /// Relaxed (SDP) objective behind a phased-array solution, mW.
    pub relaxed_objective: Option<f64>,
    pub weights: Option<DVector<Complex64>>,
    pub trace: Option<OptimizationTrace>,
    pub sdp_report: Option<SolveReport>,
}

pub fn solve_benchmark(
    scheme: Scheme,
    geom: &ArrayGeometry,
    targets: &TargetSet,
    p_t: f64,
    cfg: &BcdConfig,
) -> Result<BenchmarkResult> {
    cfg.validate()?;
    let n = geom.num_elements();
    match scheme {
        Scheme::RaaMimo | Scheme::RaaPa => {
            let shape = SurfaceShape::flat(n);
            let rm = response_matrix(geom, targets, &shape)?;
            let (cov, report) = solve_per_antenna_sdp(&rm.b, p_t, cfg.sdp_tol)?;
            if scheme == Scheme::RaaMimo {
                let objective = cumulated_power(&cov, &rm)?;
                return Ok(BenchmarkResult {
                    scheme,
                    covariance: cov,
                    shape,
                    objective,
                    relaxed_objective: None,
                    weights: None,
                    trace: None,
                    sdp_report: Some(report),
                });
            }
            let seed = randomization_seed(cfg.rng_seed, 0, 0);
            let (w, _) = randomize_rank1(&cov, &rm.b, cfg.randomization_samples, seed)?;
            let relaxed = cumulated_power(&cov, &rm)?;
            let rank1 = CovarianceMatrix::from_weights(&w, p_t)?;
            let objective = cumulated_power(&rank1, &rm)?;
            Ok(BenchmarkResult {
                scheme,
                covariance: rank1,
                shape,
                objective,
                relaxed_objective: Some(relaxed),
                weights: Some(w),
                trace: None,
                sdp_report: Some(report),
            })
        }
        Scheme::FimMimo => {
            let out = bcd_optimize(geom, targets, p_t, cfg)?;
            Ok(BenchmarkResult {
                scheme,
                covariance: out.covariance,
                shape: out.shape,
                objective: out.objective,
                relaxed_objective: None,
                weights: None,
                trace: Some(out.trace),
                sdp_report: None,
            })
        }
        Scheme::FimPa => {
            let out = run_bcd(geom, targets, p_t, cfg, true)?;
            let best = out.rank1.expect("phased runs record rank-1 solutions");
            let rank1 = CovarianceMatrix::from_weights(&best.weights, p_t)?;
            let objective = cumulated_power(&rank1, &response_matrix(geom, targets, &best.shape)?)?;
            Ok(BenchmarkResult {
                scheme,
                covariance: rank1,
                shape: best.shape,
                objective,
                relaxed_objective: Some(out.objective),
                weights: Some(best.weights),
                trace: Some(out.trace),
                sdp_report: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("fim".parse::<Scheme>().is_err());
    }

    #[test]
    fn flat_start_comes_first() {
        let geom = ArrayGeometry::half_wavelength(3, 3, 0.5).unwrap();
        let starts = initial_shapes(&geom, &BcdConfig::default()).unwrap();
        assert_eq!(starts.len(), 4);
        assert_eq!(starts[0], SurfaceShape::flat(9));
        assert!(starts.iter().all(|s| s.max_abs() <= 0.5));
        let zero_range = geom.with_d_max(0.0).unwrap();
        assert_eq!(initial_shapes(&zero_range, &BcdConfig::default()).unwrap().len(), 1);
    }

    #[test]
    fn provided_starts_are_validated() {
        let geom = ArrayGeometry::half_wavelength(2, 1, 0.5).unwrap();
        let cfg = BcdConfig {
            init_scheme: InitScheme::Provided(vec![SurfaceShape::from_vec(vec![0.9, 0.0])]),
            ..Default::default()
        };
        assert!(initial_shapes(&geom, &cfg).is_err());
    }

    #[test]
    fn zero_range_is_single_sdp() {
        let geom = ArrayGeometry::half_wavelength(3, 3, 0.0).unwrap();
        let targets = TargetSet::reference();
        let cfg = BcdConfig::default();
        let out = bcd_optimize(&geom, &targets, 10.0, &cfg).unwrap();
        let rigid = solve_benchmark(Scheme::RaaMimo, &geom, &targets, 10.0, &cfg).unwrap();
        assert_eq!(out.trace.outer_iterations(), 1);
        assert_eq!(out.trace.termination_reason, TerminationReason::Stationary);
        assert_eq!(out.objective, rigid.objective);
    }

    #[test]
    fn config_validation() {
        assert!(BcdConfig::default().validate().is_ok());
        assert!(BcdConfig { n_starts: 0, ..Default::default() }.validate().is_err());
        assert!(BcdConfig { max_outer_iters: 0, ..Default::default() }.validate().is_err());
    }
}
