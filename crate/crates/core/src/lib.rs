//! Transmit waveform design for MIMO sensing with a flexible intelligent
//! metasurface (FIM).
//!
//! The transmitter is a uniform planar array whose elements can each be
//! displaced along the surface normal. Given a set of target directions, the
//! crate jointly picks a transmit covariance matrix (under a per-antenna power
//! constraint) and a surface shape to maximize the cumulated probing power
//! delivered to the targets.
//!
//! Layout:
//!
//! * [`array`] - geometry, steering vectors, response matrix `A` and `B = A A^H`.
//! * [`objective`] - cumulated power `tr(R B)` and its gradient w.r.t. the shape.
//! * [`covariance`] - per-antenna SDP solver, total-power closed form,
//!   Gaussian randomization, spectral analysis of `B`.
//! * [`shape`] - projected gradient ascent on the surface shape.
//! * [`bcd`] - alternating optimization and the four benchmark schemes.
//! * [`beampattern`] - angular power maps and per-target powers.
//! * [`config`], [`record`], [`experiment`] - the file-based experiment harness
//!   behind the `fimsense` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod bcd;
pub mod beampattern;
pub mod config;
pub mod covariance;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod objective;
pub mod record;
pub mod shape;
pub mod units;

pub use array::{response_matrix, steering_vector, ArrayGeometry, ResponseMatrix, SurfaceShape, Target, TargetSet};
pub use bcd::{
    bcd_optimize, solve_benchmark, BcdConfig, BcdOutcome, BenchmarkResult, InitScheme, OptimizationTrace, Scheme,
    TerminationReason,
};
pub use beampattern::{evaluate_beampattern, target_powers, BeampatternGrid, TargetPowers};
pub use covariance::{
    closed_form_total_power, randomize_rank1, rank_profile, solve_per_antenna_sdp, ConstraintKind, CovarianceMatrix,
    RankProfile, SolveReport,
};
pub use error::{Error, Result};
pub use objective::{cumulated_power, evaluate, finite_difference_gradient, gradient_shape, ObjectiveEval};
pub use shape::{ascend_shape, project_shape, AscentConfig, AscentStatus, AscentTrace};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
