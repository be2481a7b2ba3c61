//! Result persistence: the JSON result record and the CSV artifacts.
//!
//! Every CSV has a fixed header and re-parses into the same rows. Floats are
//! written in shortest round-trip form, so covariance and shape files reload
//! bit-exactly.

use std::fs::{self, File};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::{ArrayGeometry, SurfaceShape};
use crate::bcd::{Scheme, TerminationReason};
use crate::beampattern::BeampatternGrid;
use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const RECORD_FILE: &str = "record.json";
pub const COVARIANCE_FILE: &str = "covariance.csv";
pub const SHAPE_FILE: &str = "shape.csv";
pub const BEAMPATTERN_FILE: &str = "beampattern.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub artifact_version: String,
    /// SHA-256 of the effective configuration.
    pub config_digest: String,
    pub scheme: Scheme,
    pub seed: u64,
    pub objective_mw: f64,
    pub objective_dbm: f64,
    pub per_target_dbm: Vec<f64>,
    pub min_target_dbm: f64,
    /// Relaxed objective behind a phased-array solution.
    pub relaxed_objective_mw: Option<f64>,
    pub outer_iterations: usize,
    pub termination: Option<TerminationReason>,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// SHA-256 over everything except the wall time.
    pub fn digest(&self) -> String {
        let mut stripped = self.clone();
        stripped.wall_time_s = 0.0;
        hex::encode(Sha256::digest(serde_json::to_vec(&stripped).expect("record serializes")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json_pretty() + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub row: usize,
    pub col: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeRow {
    pub index: usize,
    pub i_x: usize,
    pub i_z: usize,
    pub displacement_wavelengths: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeampatternRow {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepRow {
    pub p_t_dbm: f64,
    pub scheme: Scheme,
    pub cumulated_mw: f64,
    pub cumulated_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSweepRow {
    pub d_max_wavelengths: f64,
    pub n_x: usize,
    pub n_z: usize,
    pub cumulated_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummaryRow {
    pub scheme: Scheme,
    pub cumulated_mw: f64,
    pub cumulated_dbm: f64,
    pub min_target_dbm: f64,
    pub outer_iterations: usize,
}

/// Writes rows under the header derived from `T`'s field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(File::open(path)?);
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

pub fn covariance_rows(r: &DMatrix<Complex64>) -> Vec<CovarianceRow> {
    let n = r.nrows();
    (0..n)
        .flat_map(|row| (0..n).map(move |col| (row, col)))
        .map(|(row, col)| CovarianceRow { row, col, re: r[(row, col)].re, im: r[(row, col)].im })
        .collect()
}

/// Rebuilds an `n x n` matrix; every entry must appear exactly once.
pub fn covariance_from_rows(n: usize, rows: &[CovarianceRow]) -> Result<DMatrix<Complex64>> {
    if rows.len() != n * n {
        return Err(Error::DimensionMismatch { what: "covariance rows", expected: n * n, got: rows.len() });
    }
    let mut m = DMatrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    for r in rows {
        if r.row >= n || r.col >= n || std::mem::replace(&mut seen[r.row * n + r.col], true) {
            return Err(Error::InvalidInput(format!(
                "covariance entry ({}, {}) out of range or repeated",
                r.row, r.col
            )));
        }
        m[(r.row, r.col)] = Complex64::new(r.re, r.im);
    }
    Ok(m)
}

pub fn shape_rows(geom: &ArrayGeometry, shape: &SurfaceShape) -> Vec<ShapeRow> {
    shape
        .iter()
        .enumerate()
        .map(|(index, displacement_wavelengths)| {
            let (i_x, i_z) = geom.element_position(index);
            ShapeRow { index, i_x, i_z, displacement_wavelengths }
        })
        .collect()
}

/// Rebuilds a shape and checks it against `geom` (length, indices, box).
pub fn shape_from_rows(geom: &ArrayGeometry, rows: &[ShapeRow]) -> Result<SurfaceShape> {
    let n = geom.num_elements();
    if rows.len() != n {
        return Err(Error::DimensionMismatch { what: "shape rows", expected: n, got: rows.len() });
    }
    for (k, r) in rows.iter().enumerate() {
        if r.index != k || geom.element_position(k) != (r.i_x, r.i_z) {
            return Err(Error::InvalidInput(format!("shape row {k} has inconsistent indices")));
        }
    }
    let shape = SurfaceShape::from_vec(rows.iter().map(|r| r.displacement_wavelengths).collect());
    geom.validate_shape(&shape)?;
    Ok(shape)
}

/// Row-major over theta, then phi.
pub fn beampattern_rows(grid: &BeampatternGrid) -> Vec<BeampatternRow> {
    let mut rows = Vec::with_capacity(grid.theta_axis.len() * grid.phi_axis.len());
    for (i, theta) in grid.theta_axis.iter().enumerate() {
        for (j, phi) in grid.phi_axis.iter().enumerate() {
            rows.push(BeampatternRow {
                theta_deg: theta.to_degrees(),
                phi_deg: phi.to_degrees(),
                power_dbm: grid.power_dbm[(i, j)],
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> ResultRecord {
        ResultRecord {
            artifact_version: ARTIFACT_VERSION.into(),
            config_digest: "ab".repeat(32),
            scheme: Scheme::FimPa,
            seed: 7,
            objective_mw: 1455.0512345,
            objective_dbm: 31.628_1,
            per_target_dbm: vec![26.1, 26.2, 0.1 + 0.2],
            min_target_dbm: 0.1 + 0.2,
            relaxed_objective_mw: Some(1460.0),
            outer_iterations: 17,
            termination: Some(TerminationReason::Threshold),
            wall_time_s: 1.25,
        }
    }

    #[test]
    fn record_round_trips_and_digest_ignores_wall_time() {
        let rec = sample_record();
        let back = ResultRecord::from_json_str(&rec.to_json_pretty()).unwrap();
        assert_eq!(rec, back);
        let mut later = rec.clone();
        later.wall_time_s = 99.0;
        assert_eq!(rec.digest(), later.digest());
        later.seed = 8;
        assert_ne!(rec.digest(), later.digest());
    }

    #[test]
    fn csv_headers_are_fixed() {
        let dir = tempfile::tempdir().unwrap();
        type Writer = Box<dyn Fn(&Path) -> Result<()>>;
        let cases: [(&str, Writer); 5] = [
            (
                "theta_deg,phi_deg,power_dbm",
                Box::new(|p| write_csv(p, &[BeampatternRow { theta_deg: 0.0, phi_deg: 0.0, power_dbm: 1.0 }])),
            ),
            (
                "p_t_dbm,scheme,cumulated_mw,cumulated_dbm",
                Box::new(|p| {
                    write_csv(
                        p,
                        &[PowerSweepRow { p_t_dbm: 0.0, scheme: Scheme::RaaPa, cumulated_mw: 1.0, cumulated_dbm: 0.0 }],
                    )
                }),
            ),
            (
                "d_max_wavelengths,n_x,n_z,cumulated_mw",
                Box::new(|p| {
                    write_csv(p, &[RangeSweepRow { d_max_wavelengths: 0.5, n_x: 2, n_z: 2, cumulated_mw: 1.0 }])
                }),
            ),
            ("row,col,re,im", Box::new(|p| write_csv(p, &[CovarianceRow { row: 0, col: 0, re: 1.0, im: 0.0 }]))),
            (
                "index,i_x,i_z,displacement_wavelengths",
                Box::new(|p| write_csv(p, &[ShapeRow { index: 0, i_x: 0, i_z: 0, displacement_wavelengths: 0.0 }])),
            ),
        ];
        for (k, (header, write)) in cases.iter().enumerate() {
            let path = dir.path().join(format!("{k}.csv"));
            write(&path).unwrap();
            let text = fs::read_to_string(&path).unwrap();
            assert_eq!(text.lines().next().unwrap(), *header);
        }
        let text = fs::read_to_string(dir.path().join("1.csv")).unwrap();
        assert!(text.contains(",raa-pa,"));
    }

    #[test]
    fn covariance_csv_is_bit_exact() {
        let r = DMatrix::from_fn(3, 3, |i, j| {
            Complex64::new(1.0 / (1.0 + i as f64 + j as f64), (i as f64 - j as f64) / 7.0)
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_csv(&path, &covariance_rows(&r)).unwrap();
        let back = covariance_from_rows(3, &read_csv(&path).unwrap()).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn shape_rows_check_geometry() {
        let geom = ArrayGeometry::half_wavelength(3, 2, 0.5).unwrap();
        let shape = SurfaceShape::from_vec(vec![0.1, -0.2, 0.3, 0.0, 0.5, -0.5]);
        let rows = shape_rows(&geom, &shape);
        assert_eq!((rows[4].i_x, rows[4].i_z), (1, 1));
        assert_eq!(shape_from_rows(&geom, &rows).unwrap(), shape);
        let mut bad = rows.clone();
        bad[0].displacement_wavelengths = 0.7;
        assert!(shape_from_rows(&geom, &bad).is_err());
        assert!(shape_from_rows(&geom, &rows[..5]).is_err());
    }

    #[test]
    fn covariance_rows_reject_duplicates() {
        let rows = vec![CovarianceRow { row: 0, col: 0, re: 1.0, im: 0.0 }; 4];
        assert!(covariance_from_rows(2, &rows).is_err());
    }
}
