//! Flexible uniform planar array: geometry, surface shape, targets and the
//! resulting response matrix.
//!
//! Elements sit on the xz plane and move only along y. Element `n` has grid
//! position `(i_x, i_z)` with flat index `n = i_z * n_x + i_x`, which is the
//! ordering produced by `a_z ⊗ a_x`. Spacings and displacements are expressed
//! in wavelengths, so the wavenumber enters every phase as `2π`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    n_x: usize,
    n_z: usize,
    dx: f64,
    dz: f64,
    wavelength: f64,
    d_max: f64,
}

impl ArrayGeometry {
    /// `dx`, `dz` and `d_max` are in wavelengths, `wavelength` in meters.
    pub fn new(n_x: usize, n_z: usize, dx: f64, dz: f64, wavelength: f64, d_max: f64) -> Result<Self> {
        if n_x == 0 || n_z == 0 {
            return Err(Error::InvalidInput(format!("array size {n_x}x{n_z}: both dimensions must be >= 1")));
        }
        if !(dx > 0.0 && dx.is_finite()) || !(dz > 0.0 && dz.is_finite()) {
            return Err(Error::InvalidInput(format!("element spacing ({dx}, {dz}) must be positive")));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidInput(format!("wavelength {wavelength} must be positive")));
        }
        if !(d_max >= 0.0 && d_max.is_finite()) {
            return Err(Error::InvalidInput(format!("morphing range {d_max} must be >= 0")));
        }
        Ok(Self { n_x, n_z, dx, dz, wavelength, d_max })
    }

    /// Half-wavelength `n_x` x `n_z` array at 28 GHz.
    pub fn half_wavelength(n_x: usize, n_z: usize, d_max: f64) -> Result<Self> {
        Self::new(n_x, n_z, 0.5, 0.5, crate::units::wavelength_from_frequency(28e9), d_max)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn num_elements(&self) -> usize {
        self.n_x * self.n_z
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// `k_c = 2π/λ` in rad/m.
    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// Same array with a different morphing range.
    pub fn with_d_max(&self, d_max: f64) -> Result<Self> {
        Self::new(self.n_x, self.n_z, self.dx, self.dz, self.wavelength, d_max)
    }

    /// Grid position `(i_x, i_z)` of flat element index `n`.
    pub fn element_position(&self, n: usize) -> (usize, usize) {
        (n % self.n_x, n / self.n_x)
    }

    /// Checks length and the box constraint `|Δd_n| <= d_max`.
    pub fn validate_shape(&self, shape: &SurfaceShape) -> Result<()> {
        self.check_len(shape)?;
        let tol = 1e-12 * self.d_max.max(1.0);
        if let Some((n, v)) = shape.iter().enumerate().find(|(_, v)| !v.is_finite() || v.abs() > self.d_max + tol) {
            return Err(Error::InvalidInput(format!(
                "displacement {v} at element {n} exceeds morphing range {}",
                self.d_max
            )));
        }
        Ok(())
    }

    fn check_len(&self, shape: &SurfaceShape) -> Result<()> {
        if shape.len() != self.num_elements() {
            return Err(Error::DimensionMismatch {
                what: "surface shape",
                expected: self.num_elements(),
                got: shape.len(),
            });
        }
        Ok(())
    }
}

/// Out-of-plane displacement of every element, in wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceShape(DVector<f64>);

impl SurfaceShape {
    pub fn new(displacements: DVector<f64>) -> Self {
        Self(displacements)
    }

    pub fn from_vec(displacements: Vec<f64>) -> Self {
        Self(DVector::from_vec(displacements))
    }

    /// Converts displacements given in meters.
    pub fn from_meters(geom: &ArrayGeometry, meters: &[f64]) -> Self {
        Self::from_vec(meters.iter().map(|m| m / geom.wavelength()).collect())
    }

    /// Rigid (flat) surface.
    pub fn flat(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn to_meters(&self, geom: &ArrayGeometry) -> Vec<f64> {
        self.0.iter().map(|d| d * geom.wavelength()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Elevation, radians in `[0, π]`.
    pub theta: f64,
    /// Azimuth, radians in `[0, π]`.
    pub phi: f64,
    pub rcs: Complex64,
}

impl Target {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi, rcs: Complex64::new(1.0, 0.0) }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// `sin θ sin φ`, the factor coupling displacement into phase.
    pub fn normal_projection(&self) -> f64 {
        self.theta.sin() * self.phi.sin()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet(Vec<Target>);

impl TargetSet {
    pub fn new(targets: Vec<Target>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidInput("target set: at least one target is required".into()));
        }
        let in_range = |x: f64| (0.0..=PI).contains(&x);
        if let Some(t) = targets.iter().find(|t| !in_range(t.theta) || !in_range(t.phi)) {
            return Err(Error::InvalidInput(format!("target angles ({}, {}) rad outside [0, π]", t.theta, t.phi)));
        }
        Ok(Self(targets))
    }

    pub fn from_degrees(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(t, p)| Target::from_degrees(t, p)).collect())
    }

    /// The three unit-RCS targets used throughout the reference scenario.
    pub fn reference() -> Self {
        Self::from_degrees(&[(30.0, 60.0), (30.0, 120.0), (135.0, 90.0)]).expect("valid angles")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Target> {
        self.0.iter()
    }

    pub fn targets(&self) -> &[Target] {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct ResponseMatrix {
    /// `N_t x K`, column `k` is the steering vector toward target `k`.
    pub a: DMatrix<Complex64>,
    /// `A A^H`.
    pub b: DMatrix<Complex64>,
}

impl ResponseMatrix {
    pub fn num_elements(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_targets(&self) -> usize {
        self.a.ncols()
    }
}

/// `(a_z ⊗ a_x) ⊙ a_y` toward `(theta, phi)`.
pub fn steering_vector(geom: &ArrayGeometry, theta: f64, phi: f64, shape: &SurfaceShape) -> Result<DVector<Complex64>> {
    geom.check_len(shape)?;
    Ok(steering_unchecked(geom, theta, phi, shape.as_vector()))
}

pub(crate) fn steering_unchecked(
    geom: &ArrayGeometry,
    theta: f64,
    phi: f64,
    shape: &DVector<f64>,
) -> DVector<Complex64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let v_x = geom.dx * st * cp;
    let v_z = geom.dz * ct;
    let a_x: Vec<Complex64> = (0..geom.n_x).map(|i| Complex64::from_polar(1.0, -TAU * i as f64 * v_x)).collect();
    let a_z: Vec<Complex64> = (0..geom.n_z).map(|i| Complex64::from_polar(1.0, -TAU * i as f64 * v_z)).collect();
    let normal = st * sp;
    DVector::from_fn(geom.num_elements(), |n, _| {
        let (ix, iz) = geom.element_position(n);
        a_z[iz] * a_x[ix] * Complex64::from_polar(1.0, -TAU * shape[n] * normal)
    })
}

pub(crate) fn steering_matrix(geom: &ArrayGeometry, targets: &TargetSet, shape: &DVector<f64>) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(geom.num_elements(), targets.len());
    for (k, t) in targets.iter().enumerate() {
        a.set_column(k, &steering_unchecked(geom, t.theta, t.phi, shape));
    }
    a
}

pub fn response_matrix(geom: &ArrayGeometry, targets: &TargetSet, shape: &SurfaceShape) -> Result<ResponseMatrix> {
    geom.check_len(shape)?;
    let a = steering_matrix(geom, targets, shape.as_vector());
    let b = &a * a.adjoint();
    Ok(ResponseMatrix { a, b })
}
