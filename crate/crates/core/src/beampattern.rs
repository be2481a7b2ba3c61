//! Transmit beampatterns and per-target power metrics.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::array::{response_matrix, steering_unchecked, ArrayGeometry, SurfaceShape, TargetSet};
use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg::quadratic_form;
use crate::objective::cumulated_power;
use crate::units::mw_to_dbm;

#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternGrid {
    pub theta_axis: Vec<f64>,
    pub phi_axis: Vec<f64>,
    /// `power_dbm[(i, j)]` is the power toward `(theta_axis[i], phi_axis[j])`.
    pub power_dbm: DMatrix<f64>,
}

impl BeampatternGrid {
    pub fn max_dbm(&self) -> f64 {
        self.power_dbm.max()
    }
}

/// `count` evenly spaced angles covering `[0, π]`.
pub fn uniform_axis(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| std::f64::consts::PI * i as f64 / (count - 1) as f64).collect(),
    }
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    let in_range = axis.iter().all(|v| (0.0..=std::f64::consts::PI).contains(v));
    let increasing = axis.windows(2).all(|w| w[1] > w[0]);
    if axis.is_empty() || !in_range || !increasing {
        return Err(Error::InvalidInput(format!(
            "{name} axis must be non-empty, strictly increasing and within [0, π]"
        )));
    }
    Ok(())
}

/// `10 log10(a^H R a)` over the grid.
pub fn evaluate_beampattern(
    r: &CovarianceMatrix,
    geom: &ArrayGeometry,
    shape: &SurfaceShape,
    theta_axis: &[f64],
    phi_axis: &[f64],
) -> Result<BeampatternGrid> {
    check_axis(theta_axis, "theta")?;
    check_axis(phi_axis, "phi")?;
    let n = geom.num_elements();
    if r.dim() != n || shape.len() != n {
        return Err(Error::DimensionMismatch {
            what: "beampattern inputs",
            expected: n,
            got: r.dim().max(shape.len()),
        });
    }
    let rows: Vec<Vec<f64>> = theta_axis
        .par_iter()
        .map(|&theta| {
            phi_axis
                .iter()
                .map(|&phi| {
                    let a = steering_unchecked(geom, theta, phi, shape.as_vector());
                    mw_to_dbm(quadratic_form(r.matrix(), &a).max(0.0))
                })
                .collect()
        })
        .collect();
    let power_dbm = DMatrix::from_fn(theta_axis.len(), phi_axis.len(), |i, j| rows[i][j]);
    Ok(BeampatternGrid { theta_axis: theta_axis.to_vec(), phi_axis: phi_axis.to_vec(), power_dbm })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetPowers {
    pub per_target_dbm: Vec<f64>,
    /// Cumulated power `tr(R B)`, mW.
    pub cumulated_mw: f64,
    pub min_dbm: f64,
}

pub fn target_powers(
    r: &CovarianceMatrix,
    geom: &ArrayGeometry,
    targets: &TargetSet,
    shape: &SurfaceShape,
) -> Result<TargetPowers> {
    let rm = response_matrix(geom, targets, shape)?;
    let cumulated_mw = cumulated_power(r, &rm)?;
    let per_target_dbm: Vec<f64> = (0..rm.num_targets())
        .map(|k| mw_to_dbm(quadratic_form(r.matrix(), &rm.a.column(k).into_owned()).max(0.0)))
        .collect();
    let min_dbm = per_target_dbm.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(TargetPowers { per_target_dbm, cumulated_mw, min_dbm })
}
