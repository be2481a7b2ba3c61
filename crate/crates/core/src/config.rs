//! JSON experiment configuration.
//!
//! Keys carry their units (`p_t_dbm`, `theta_deg`, `d_max_wavelengths`).
//! Unknown keys are rejected at every level. Parsing checks syntax only;
//! [`ExperimentConfig::validate`] builds every domain object once so that a
//! config which loads is known to be runnable.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::{ArrayGeometry, SurfaceShape, Target, TargetSet};
use crate::bcd::{BcdConfig, InitScheme, Scheme};
use crate::covariance::{DEFAULT_RANDOMIZATION_SAMPLES, DEFAULT_SDP_TOL};
use crate::error::{Error, Result};
use crate::shape::AscentConfig;
use crate::units::{dbm_to_mw, wavelength_from_frequency};

pub const DEFAULT_FREQUENCY_HZ: f64 = 28e9;
pub const DEFAULT_GRID_POINTS: usize = 181;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub targets: Vec<TargetConfig>,
    pub power: PowerConfig,
    #[serde(default)]
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_x: usize,
    pub n_z: usize,
    #[serde(default = "half")]
    pub dx_wavelengths: f64,
    #[serde(default = "half")]
    pub dz_wavelengths: f64,
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    pub d_max_wavelengths: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub theta_deg: f64,
    pub phi_deg: f64,
    #[serde(default = "one")]
    pub rcs_re: f64,
    #[serde(default)]
    pub rcs_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub p_t_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitSchemeConfig {
    Zero,
    UniformBox,
    Provided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmConfig {
    pub scheme: Scheme,
    pub max_outer_iters: usize,
    pub rel_increase_threshold_db: f64,
    pub n_starts: usize,
    pub init_scheme: InitSchemeConfig,
    /// Start shapes for `init_scheme = "provided"`, one displacement per
    /// element in wavelengths.
    pub initial_shapes_wavelengths: Vec<Vec<f64>>,
    pub ascent: AscentConfig,
    pub sdp_tol: f64,
    pub randomization_samples: usize,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        let bcd = BcdConfig::default();
        Self {
            scheme: Scheme::FimMimo,
            max_outer_iters: bcd.max_outer_iters,
            rel_increase_threshold_db: bcd.rel_increase_threshold_db,
            n_starts: bcd.n_starts,
            init_scheme: InitSchemeConfig::UniformBox,
            initial_shapes_wavelengths: Vec::new(),
            ascent: AscentConfig::default(),
            sdp_tol: DEFAULT_SDP_TOL,
            randomization_samples: DEFAULT_RANDOMIZATION_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub grid_theta_points: usize,
    pub grid_phi_points: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), grid_theta_points: DEFAULT_GRID_POINTS, grid_phi_points: DEFAULT_GRID_POINTS }
    }
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

fn default_frequency() -> f64 {
    DEFAULT_FREQUENCY_HZ
}

impl ExperimentConfig {
    /// The 10x10, 28 GHz, three-target, 10 dBm setup.
    pub fn reference(d_max_wavelengths: f64) -> Self {
        let targets = [(30.0, 60.0), (30.0, 120.0), (135.0, 90.0)]
            .into_iter()
            .map(|(theta_deg, phi_deg)| TargetConfig { theta_deg, phi_deg, rcs_re: 1.0, rcs_im: 0.0 })
            .collect();
        Self {
            geometry: GeometryConfig {
                n_x: 10,
                n_z: 10,
                dx_wavelengths: 0.5,
                dz_wavelengths: 0.5,
                frequency_hz: DEFAULT_FREQUENCY_HZ,
                d_max_wavelengths,
            },
            targets,
            power: PowerConfig { p_t_dbm: 10.0 },
            algorithm: AlgorithmConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }

    /// Parses and validates.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json_pretty() + "\n")?;
        Ok(())
    }

    /// SHA-256 of the compact JSON form, ignoring the output directory.
    pub fn digest(&self) -> String {
        let mut normalized = self.clone();
        normalized.output.dir = PathBuf::new();
        let bytes = serde_json::to_vec(&normalized).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Checks every block against the invariants of the types it feeds.
    pub fn validate(&self) -> Result<()> {
        let invalid = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.geometry().map_err(invalid)?;
        self.target_set().map_err(invalid)?;
        if !self.power.p_t_dbm.is_finite() {
            return Err(Error::Config("power.p_t_dbm must be finite".into()));
        }
        if self.output.grid_theta_points < 2 || self.output.grid_phi_points < 2 {
            return Err(Error::Config("output grid needs at least 2 points per axis".into()));
        }
        let has_shapes = !self.algorithm.initial_shapes_wavelengths.is_empty();
        match (self.algorithm.init_scheme, has_shapes) {
            (InitSchemeConfig::Provided, false) => {
                return Err(Error::Config("init_scheme \"provided\" needs initial_shapes_wavelengths".into()))
            }
            (InitSchemeConfig::Zero | InitSchemeConfig::UniformBox, true) => {
                return Err(Error::Config("initial_shapes_wavelengths requires init_scheme \"provided\"".into()))
            }
            _ => {}
        }
        self.bcd_config().map_err(invalid)?.validate().map_err(invalid)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        let g = &self.geometry;
        if !(g.frequency_hz > 0.0) || !g.frequency_hz.is_finite() {
            return Err(Error::Config("geometry.frequency_hz must be positive".into()));
        }
        let wavelength = wavelength_from_frequency(g.frequency_hz);
        ArrayGeometry::new(g.n_x, g.n_z, g.dx_wavelengths, g.dz_wavelengths, wavelength, g.d_max_wavelengths)
    }

    pub fn target_set(&self) -> Result<TargetSet> {
        let targets = self
            .targets
            .iter()
            .map(|t| {
                if !(t.rcs_re.is_finite() && t.rcs_im.is_finite()) {
                    return Err(Error::Config("target rcs must be finite".into()));
                }
                let mut target = Target::from_degrees(t.theta_deg, t.phi_deg);
                target.rcs = Complex64::new(t.rcs_re, t.rcs_im);
                Ok(target)
            })
            .collect::<Result<Vec<_>>>()?;
        TargetSet::new(targets)
    }

    /// Transmit power in mW.
    pub fn p_t_mw(&self) -> f64 {
        dbm_to_mw(self.power.p_t_dbm)
    }

    pub fn bcd_config(&self) -> Result<BcdConfig> {
        let a = &self.algorithm;
        let init_scheme = match a.init_scheme {
            InitSchemeConfig::Zero => InitScheme::Zero,
            InitSchemeConfig::UniformBox => InitScheme::UniformBox,
            InitSchemeConfig::Provided => {
                let geom = self.geometry()?;
                let shapes = a
                    .initial_shapes_wavelengths
                    .iter()
                    .map(|s| {
                        let shape = SurfaceShape::from_vec(s.clone());
                        geom.validate_shape(&shape)?;
                        Ok(shape)
                    })
                    .collect::<Result<Vec<_>>>()?;
                InitScheme::Provided(shapes)
            }
        };
        Ok(BcdConfig {
            max_outer_iters: a.max_outer_iters,
            rel_increase_threshold_db: a.rel_increase_threshold_db,
            ascent: a.ascent.clone(),
            n_starts: a.n_starts,
            rng_seed: self.seed,
            init_scheme,
            sdp_tol: a.sdp_tol,
            randomization_samples: a.randomization_samples,
        })
    }

    /// Copy with a different scheme.
    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        let mut cfg = self.clone();
        cfg.algorithm.scheme = scheme;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "geometry": {"n_x": 4, "n_z": 4, "d_max_wavelengths": 0.5},
        "targets": [{"theta_deg": 30, "phi_deg": 60}],
        "power": {"p_t_dbm": 10}
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(cfg.geometry.dx_wavelengths, 0.5);
        assert_eq!(cfg.geometry.frequency_hz, 28e9);
        assert_eq!(cfg.algorithm.scheme, Scheme::FimMimo);
        assert_eq!(cfg.output.grid_theta_points, 181);
        assert!((cfg.p_t_mw() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("\"p_t_dbm\": 10", "\"p_t_dbm\": 10, \"p_t_w\": 1");
        assert_eq!(ExperimentConfig::from_json_str(&bad).unwrap_err().exit_code(), 2);
        let bad = MINIMAL.replace("\"d_max_wavelengths\"", "\"d_max\"");
        assert!(ExperimentConfig::from_json_str(&bad).is_err());
    }

    #[test]
    fn out_of_box_initial_shape_rejected() {
        let mut cfg = ExperimentConfig::from_json_str(MINIMAL).unwrap();
        cfg.algorithm.init_scheme = InitSchemeConfig::Provided;
        cfg.algorithm.initial_shapes_wavelengths = vec![vec![0.6; 16]];
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        cfg.algorithm.initial_shapes_wavelengths = vec![vec![0.5; 16]];
        cfg.validate().unwrap();
    }

    #[test]
    fn bad_values_rejected() {
        for (from, to) in [("\"n_x\": 4", "\"n_x\": 0"), ("\"d_max_wavelengths\": 0.5", "\"d_max_wavelengths\": -1")] {
            let bad = MINIMAL.replace(from, to);
            assert_eq!(ExperimentConfig::from_json_str(&bad).unwrap_err().exit_code(), 2, "{to}");
        }
    }

    #[test]
    fn digest_tracks_content() {
        let a = ExperimentConfig::reference(0.5);
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.digest(), b.digest());
        b.seed = 1;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn reference_round_trips() {
        let cfg = ExperimentConfig::reference(1.0);
        let back = ExperimentConfig::from_json_str(&cfg.to_json_pretty()).unwrap();
        assert_eq!(cfg, back);
    }
}
