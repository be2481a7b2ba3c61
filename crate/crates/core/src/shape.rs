//! Projected gradient ascent on the surface shape for a fixed covariance.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, SurfaceShape, TargetSet};
use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::objective::power_and_gradient;

/// Smallest trial step before the line search gives up.
pub const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AscentConfig {
    /// Stop once `‖∇P_c‖₂ <= grad_tol`.
    pub grad_tol: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Armijo sufficient-increase constant.
    pub armijo_c: f64,
    /// Backtracking factor.
    pub shrink: f64,
    /// Largest per-element move of the first trial step, in wavelengths.
    /// The trial step is `initial_step / ‖∇P_c‖∞`, which makes the iteration
    /// invariant to the scale of the objective.
    pub initial_step: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-6, max_iters: 1000, armijo_c: 1e-4, shrink: 0.5, initial_step: 0.1 }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.grad_tol > 0.0) || self.max_iters == 0 || !(self.initial_step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ascent config {self:?}: tolerances, caps and steps must be positive"
            )));
        }
        if !open_unit(self.armijo_c) || !open_unit(self.shrink) {
            return Err(Error::InvalidInput(format!(
                "ascent config: armijo_c ({}) and shrink ({}) must lie in (0, 1)",
                self.armijo_c, self.shrink
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AscentStatus {
    /// Raw gradient norm fell below `grad_tol`.
    GradientTolerance,
    /// Projected gradient vanished: every nonzero gradient entry pushes
    /// against an active bound.
    ProjectedStationary,
    /// No step above [`MIN_STEP`] satisfied the Armijo test.
    LineSearchFailed,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentTrace {
    /// Objective at the start and after every accepted step, mW.
    pub values: Vec<f64>,
    /// Accepted step sizes.
    pub steps: Vec<f64>,
    /// Raw gradient norm at every visited point.
    pub grad_norms: Vec<f64>,
    /// Projected gradient norm at every visited point.
    pub projected_grad_norms: Vec<f64>,
    pub iterations: usize,
    pub status: AscentStatus,
}

impl AscentTrace {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trace holds the initial value")
    }
}

/// Entrywise `sgn(x) min(|x|, d_max)`.
pub fn project_shape(shape: &DVector<f64>, d_max: f64) -> SurfaceShape {
    SurfaceShape::new(shape.map(|v| v.clamp(-d_max, d_max)))
}

fn projected_gradient_norm(x: &DVector<f64>, g: &DVector<f64>, d_max: f64) -> f64 {
    x.iter()
        .zip(g.iter())
        .map(|(&xi, &gi)| {
            let blocked = (xi >= d_max && gi > 0.0) || (xi <= -d_max && gi < 0.0);
            if blocked {
                0.0
            } else {
                gi * gi
            }
        })
        .sum::<f64>()
        .sqrt()
}

/// Maximizes `P_c` over the shape box for a fixed covariance.
///
/// Each iteration tries `Δd ← proj(Δd + ε ∇P_c)` and backtracks on `ε` until
/// `P_c(new) >= P_c(old) + c ∇P_c·(new - old)`, which reduces to
/// `c ε ‖∇P_c‖²` whenever no coordinate is clipped.
pub fn ascend_shape(
    r: &CovarianceMatrix,
    geom: &ArrayGeometry,
    targets: &TargetSet,
    shape0: &SurfaceShape,
    cfg: &AscentConfig,
) -> Result<(SurfaceShape, AscentTrace)> {
    cfg.validate()?;
    geom.validate_shape(shape0)?;
    if r.dim() != geom.num_elements() {
        return Err(Error::DimensionMismatch {
            what: "covariance vs array",
            expected: geom.num_elements(),
            got: r.dim(),
        });
    }
    let d_max = geom.d_max();
    let rm = r.matrix();
    let mut x = project_shape(shape0.as_vector(), d_max).into_vector();
    let (mut f, g) = power_and_gradient(rm, geom, targets, &x, true);
    let mut g = g.expect("gradient requested");

    let mut trace = AscentTrace {
        values: vec![f],
        steps: Vec::new(),
        grad_norms: Vec::new(),
        projected_grad_norms: Vec::new(),
        iterations: 0,
        status: AscentStatus::MaxIterations,
    };

    loop {
        let gnorm = g.norm();
        trace.grad_norms.push(gnorm);
        trace.projected_grad_norms.push(projected_gradient_norm(&x, &g, d_max));
        if gnorm <= cfg.grad_tol {
            trace.status = AscentStatus::GradientTolerance;
            break;
        }
        if trace.iterations >= cfg.max_iters {
            trace.status = AscentStatus::MaxIterations;
            break;
        }
        let mut eps = cfg.initial_step / g.amax();
        let accepted = loop {
            let candidate = project_shape(&(&x + &g * eps), d_max).into_vector();
            let predicted = g.dot(&(&candidate - &x));
            if predicted <= 0.0 {
                break None;
            }
            let (fc, _) = power_and_gradient(rm, geom, targets, &candidate, false);
            if fc >= f + cfg.armijo_c * predicted {
                break Some((candidate, fc));
            }
            eps *= cfg.shrink;
            if eps < MIN_STEP {
                break None;
            }
        };
        let Some((candidate, fc)) = accepted else {
            trace.status = if trace.projected_grad_norms.last() == Some(&0.0) {
                AscentStatus::ProjectedStationary
            } else {
                AscentStatus::LineSearchFailed
            };
            break;
        };
        x = candidate;
        let (fx, gx) = power_and_gradient(rm, geom, targets, &x, true);
        debug_assert_eq!(fx, fc);
        f = fx;
        g = gx.expect("gradient requested");
        trace.iterations += 1;
        trace.steps.push(eps);
        trace.values.push(f);
    }
    Ok((SurfaceShape::new(x), trace))
}
