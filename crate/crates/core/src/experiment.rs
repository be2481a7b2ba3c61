//! Experiment runners behind the command-line harness.
//!
//! Each `run_*` function takes a validated [`ExperimentConfig`] and writes its
//! artifacts into an output directory. The computing halves
//! ([`run_scheme`], [`power_sweep`], [`range_sweep`], [`compare_schemes`])
//! do no I/O and can be used directly.

use std::fs;
use std::path::Path;
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use crate::array::SurfaceShape;
use crate::bcd::{solve_benchmark, BenchmarkResult, Scheme};
use crate::beampattern::{evaluate_beampattern, target_powers, uniform_axis, BeampatternGrid};
use crate::config::{ExperimentConfig, InitSchemeConfig};
use crate::covariance::{ConstraintKind, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::record::{
    beampattern_rows, covariance_from_rows, covariance_rows, read_csv, shape_from_rows, shape_rows, write_csv,
    PowerSweepRow, RangeSweepRow, ResultRecord, SchemeSummaryRow, ARTIFACT_VERSION, BEAMPATTERN_FILE, COVARIANCE_FILE,
    RECORD_FILE, SHAPE_FILE,
};
use crate::units::mw_to_dbm;

pub const CONFIG_FILE: &str = "config.json";
pub const POWER_SWEEP_FILE: &str = "power_sweep.csv";
pub const RANGE_SWEEP_FILE: &str = "range_sweep.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Solves the configured scheme and summarizes it.
pub fn run_scheme(cfg: &ExperimentConfig) -> Result<(BenchmarkResult, ResultRecord)> {
    cfg.validate()?;
    let start = Instant::now();
    let geom = cfg.geometry()?;
    let targets = cfg.target_set()?;
    let scheme = cfg.algorithm.scheme;
    let result = solve_benchmark(scheme, &geom, &targets, cfg.p_t_mw(), &cfg.bcd_config()?)?;
    let powers = target_powers(&result.covariance, &geom, &targets, &result.shape)?;
    let record = ResultRecord {
        artifact_version: ARTIFACT_VERSION.to_string(),
        config_digest: cfg.digest(),
        scheme,
        seed: cfg.seed,
        objective_mw: result.objective,
        objective_dbm: mw_to_dbm(result.objective),
        per_target_dbm: powers.per_target_dbm,
        min_target_dbm: powers.min_dbm,
        relaxed_objective_mw: result.relaxed_objective,
        outer_iterations: result.trace.as_ref().map_or(0, |t| t.outer_iterations()),
        termination: result.trace.as_ref().map(|t| t.termination_reason),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    info!(
        "{scheme}: {:.6} mW ({:.3} dBm), min target {:.3} dBm",
        record.objective_mw, record.objective_dbm, record.min_target_dbm
    );
    Ok((result, record))
}

/// Writes `record.json`, `covariance.csv`, `shape.csv` and the effective
/// `config.json` into `out`.
pub fn run_optimize(cfg: &ExperimentConfig, out: &Path) -> Result<ResultRecord> {
    let (result, record) = run_scheme(cfg)?;
    save_solution(cfg, &result, &record, out)?;
    Ok(record)
}

fn save_solution(cfg: &ExperimentConfig, result: &BenchmarkResult, record: &ResultRecord, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    cfg.save(&out.join(CONFIG_FILE))?;
    record.save(&out.join(RECORD_FILE))?;
    write_csv(&out.join(COVARIANCE_FILE), &covariance_rows(result.covariance.matrix()))?;
    write_csv(&out.join(SHAPE_FILE), &shape_rows(&cfg.geometry()?, &result.shape))
}

/// Reloads a covariance/shape pair written by [`run_optimize`].
pub fn load_solution(cfg: &ExperimentConfig, dir: &Path) -> Result<(CovarianceMatrix, SurfaceShape)> {
    let geom = cfg.geometry()?;
    let n = geom.num_elements();
    let r = covariance_from_rows(n, &read_csv(&dir.join(COVARIANCE_FILE))?)?;
    let covariance = CovarianceMatrix::new(r, cfg.p_t_mw(), ConstraintKind::PerAntenna)?;
    let shape = shape_from_rows(&geom, &read_csv(&dir.join(SHAPE_FILE))?)?;
    Ok((covariance, shape))
}

/// Angular power map of the solution stored in `result_dir`, written to
/// `out/beampattern.csv`.
pub fn run_beampattern(cfg: &ExperimentConfig, result_dir: &Path, out: &Path) -> Result<BeampatternGrid> {
    cfg.validate()?;
    let (covariance, shape) = load_solution(cfg, result_dir)?;
    let grid = beampattern(cfg, &covariance, &shape)?;
    fs::create_dir_all(out)?;
    write_csv(&out.join(BEAMPATTERN_FILE), &beampattern_rows(&grid))?;
    Ok(grid)
}

fn beampattern(cfg: &ExperimentConfig, covariance: &CovarianceMatrix, shape: &SurfaceShape) -> Result<BeampatternGrid> {
    let theta = uniform_axis(cfg.output.grid_theta_points);
    let phi = uniform_axis(cfg.output.grid_phi_points);
    evaluate_beampattern(covariance, &cfg.geometry()?, shape, &theta, &phi)
}

/// Copy of `cfg` that also starts from `shapes`, on top of its own starts.
/// The flat shape is always a start already and is skipped.
fn warm_started(cfg: &ExperimentConfig, shapes: &[SurfaceShape]) -> ExperimentConfig {
    let shapes: Vec<&SurfaceShape> = shapes.iter().filter(|s| s.max_abs() > 0.0).collect();
    if shapes.is_empty() {
        return cfg.clone();
    }
    let mut next = cfg.clone();
    let mut provided: Vec<Vec<f64>> = shapes.iter().map(|s| s.iter().collect()).collect();
    if cfg.algorithm.init_scheme == InitSchemeConfig::Provided {
        provided.extend(cfg.algorithm.initial_shapes_wavelengths.iter().cloned());
    }
    next.algorithm.n_starts = cfg.algorithm.n_starts + shapes.len();
    next.algorithm.init_scheme = InitSchemeConfig::Provided;
    next.algorithm.initial_shapes_wavelengths = provided;
    next
}

/// All four schemes at every transmit power, in the given order. From the
/// second power on, both flexible schemes also start from the previous
/// flexible optima.
pub fn power_sweep(cfg: &ExperimentConfig, p_t_dbm: &[f64]) -> Result<Vec<PowerSweepRow>> {
    cfg.validate()?;
    if p_t_dbm.is_empty() || p_t_dbm.iter().any(|p| !p.is_finite()) {
        return Err(Error::Config("power sweep needs finite transmit powers".into()));
    }
    let mut previous: Vec<SurfaceShape> = Vec::new();
    let mut rows = Vec::with_capacity(p_t_dbm.len() * Scheme::ALL.len());
    for &p in p_t_dbm {
        let runs = Scheme::ALL
            .par_iter()
            .map(|&scheme| {
                let mut point = cfg.with_scheme(scheme);
                point.power.p_t_dbm = p;
                if scheme.is_flexible() && !previous.is_empty() {
                    point = warm_started(&point, &previous);
                }
                run_scheme(&point)
            })
            .collect::<Result<Vec<_>>>()?;
        previous.clear();
        for (result, record) in runs {
            rows.push(PowerSweepRow {
                p_t_dbm: p,
                scheme: record.scheme,
                cumulated_mw: record.objective_mw,
                cumulated_dbm: record.objective_dbm,
            });
            if record.scheme.is_flexible() && !previous.contains(&result.shape) {
                previous.push(result.shape);
            }
        }
    }
    Ok(rows)
}

pub fn run_sweep_power(cfg: &ExperimentConfig, p_t_dbm: &[f64], out: &Path) -> Result<Vec<PowerSweepRow>> {
    let rows = power_sweep(cfg, p_t_dbm)?;
    fs::create_dir_all(out)?;
    write_csv(&out.join(POWER_SWEEP_FILE), &rows)?;
    Ok(rows)
}

/// Configured scheme over increasing `d_max` for each array size. The
/// optimum at one range seeds the next, so each curve is nondecreasing.
/// An empty `arrays` uses the configured array.
pub fn range_sweep(cfg: &ExperimentConfig, d_max: &[f64], arrays: &[(usize, usize)]) -> Result<Vec<RangeSweepRow>> {
    cfg.validate()?;
    if d_max.is_empty() || d_max.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Config("range sweep needs a nondecreasing list of d_max values".into()));
    }
    let default_array = [(cfg.geometry.n_x, cfg.geometry.n_z)];
    let arrays = if arrays.is_empty() { &default_array[..] } else { arrays };
    let curves = arrays
        .par_iter()
        .map(|&(n_x, n_z)| {
            let mut base = cfg.clone();
            base.geometry.n_x = n_x;
            base.geometry.n_z = n_z;
            if base.algorithm.init_scheme == InitSchemeConfig::Provided {
                base.algorithm.init_scheme = InitSchemeConfig::UniformBox;
                base.algorithm.initial_shapes_wavelengths.clear();
            }
            let mut rows = Vec::with_capacity(d_max.len());
            let mut previous: Option<SurfaceShape> = None;
            for &d in d_max {
                let mut point = base.clone();
                point.geometry.d_max_wavelengths = d;
                if let Some(shape) = &previous {
                    point = warm_started(&point, std::slice::from_ref(shape));
                }
                let (result, record) = run_scheme(&point)?;
                rows.push(RangeSweepRow { d_max_wavelengths: d, n_x, n_z, cumulated_mw: record.objective_mw });
                previous = Some(result.shape);
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(curves.into_iter().flatten().collect())
}

pub fn run_sweep_range(
    cfg: &ExperimentConfig,
    d_max: &[f64],
    arrays: &[(usize, usize)],
    out: &Path,
) -> Result<Vec<RangeSweepRow>> {
    let rows = range_sweep(cfg, d_max, arrays)?;
    fs::create_dir_all(out)?;
    write_csv(&out.join(RANGE_SWEEP_FILE), &rows)?;
    Ok(rows)
}

/// One solution per scheme, in [`Scheme::ALL`] order.
pub fn compare_schemes(cfg: &ExperimentConfig) -> Result<Vec<(ExperimentConfig, BenchmarkResult, ResultRecord)>> {
    cfg.validate()?;
    Scheme::ALL
        .par_iter()
        .map(|&scheme| {
            let point = cfg.with_scheme(scheme);
            let (result, record) = run_scheme(&point)?;
            Ok((point, result, record))
        })
        .collect()
}

/// Writes one subdirectory per scheme (solution plus beampattern) and a
/// `summary.csv`.
pub fn run_compare_schemes(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<ResultRecord>> {
    let runs = compare_schemes(cfg)?;
    fs::create_dir_all(out)?;
    let mut summary = Vec::with_capacity(runs.len());
    let mut records = Vec::with_capacity(runs.len());
    for (point, result, record) in runs {
        let dir = out.join(record.scheme.name());
        save_solution(&point, &result, &record, &dir)?;
        let grid = beampattern(&point, &result.covariance, &result.shape)?;
        write_csv(&dir.join(BEAMPATTERN_FILE), &beampattern_rows(&grid))?;
        summary.push(SchemeSummaryRow {
            scheme: record.scheme,
            cumulated_mw: record.objective_mw,
            cumulated_dbm: record.objective_dbm,
            min_target_dbm: record.min_target_dbm,
            outer_iterations: record.outer_iterations,
        });
        records.push(record);
    }
    write_csv(&out.join(SUMMARY_FILE), &summary)?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TargetConfig;

    fn small(scheme: Scheme) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::reference(0.25);
        cfg.geometry.n_x = 3;
        cfg.geometry.n_z = 3;
        cfg.targets.truncate(2);
        cfg.algorithm.scheme = scheme;
        cfg.algorithm.n_starts = 2;
        cfg.output.grid_theta_points = 7;
        cfg.output.grid_phi_points = 5;
        cfg
    }

    #[test]
    fn optimize_then_beampattern() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(Scheme::FimMimo);
        let rec = run_optimize(&cfg, dir.path()).unwrap();
        assert_eq!(ResultRecord::load(&dir.path().join(RECORD_FILE)).unwrap(), rec);
        let grid = run_beampattern(&cfg, dir.path(), dir.path()).unwrap();
        assert_eq!(grid.power_dbm.shape(), (7, 5));
        let rows: Vec<crate::record::BeampatternRow> = read_csv(&dir.path().join(BEAMPATTERN_FILE)).unwrap();
        assert_eq!(rows.len(), 35);
        assert_eq!((rows[1].theta_deg, rows[1].phi_deg), (0.0, 45.0));
    }

    #[test]
    fn beampattern_without_solution_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = run_beampattern(&small(Scheme::RaaMimo), &dir.path().join("missing"), dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn range_sweep_rejects_unsorted_ranges() {
        let err = range_sweep(&small(Scheme::FimMimo), &[0.5, 0.25], &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn range_sweep_is_monotone() {
        let mut cfg = small(Scheme::FimMimo);
        cfg.targets.push(TargetConfig { theta_deg: 100.0, phi_deg: 40.0, rcs_re: 1.0, rcs_im: 0.0 });
        let rows = range_sweep(&cfg, &[0.0, 0.1, 0.25], &[(2, 2), (3, 2)]).unwrap();
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2).filter(|w| w[0].n_x == w[1].n_x) {
            assert!(w[1].cumulated_mw >= w[0].cumulated_mw * (1.0 - 1e-8));
        }
    }

    #[test]
    fn power_sweep_covers_every_scheme() {
        let rows = power_sweep(&small(Scheme::FimMimo), &[0.0, 10.0]).unwrap();
        assert_eq!(rows.len(), 8);
        let fim = |p: f64| rows.iter().find(|r| r.p_t_dbm == p && r.scheme == Scheme::FimMimo).unwrap().cumulated_mw;
        assert!((fim(10.0) / fim(0.0) - 10.0).abs() < 1e-3);
    }
}
