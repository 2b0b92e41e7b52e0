//! Run configuration: built-in defaults, overridden by a flat JSON file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use teleport_core::{BlochAngles, FidelityError, InteractionTimes, PhysicalParams, SurfaceGrid};
use thiserror::Error;

use crate::oracle::GridSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Every knob a command can read, all optional; `None` keeps the layer below.
///
/// Physical quantities are SI; interaction times are given as the
/// dimensionless products `ε·τᵢ`, positions and widths in units of `σ_x`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub mass: Option<f64>,
    pub coupling: Option<f64>,
    pub wavelength: Option<f64>,
    pub sigma_x: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub eps_tau1: Option<f64>,
    pub eps_tau2: Option<f64>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub map_half_width: Option<f64>,
    pub map_points: Option<usize>,
    pub oracle_points: Option<usize>,
    pub oracle_half_width: Option<f64>,
    /// Oracle time step as `ε·dt`.
    pub oracle_dt_eps: Option<f64>,
    pub tau_list: Option<Vec<f64>>,
}

impl ConfigLayer {
    pub fn from_json_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            mass: over.mass.or(self.mass),
            coupling: over.coupling.or(self.coupling),
            wavelength: over.wavelength.or(self.wavelength),
            sigma_x: over.sigma_x.or(self.sigma_x),
            theta: over.theta.or(self.theta),
            phi: over.phi.or(self.phi),
            eps_tau1: over.eps_tau1.or(self.eps_tau1),
            eps_tau2: over.eps_tau2.or(self.eps_tau2),
            seed: over.seed.or(self.seed),
            shots: over.shots.or(self.shots),
            map_half_width: over.map_half_width.or(self.map_half_width),
            map_points: over.map_points.or(self.map_points),
            oracle_points: over.oracle_points.or(self.oracle_points),
            oracle_half_width: over.oracle_half_width.or(self.oracle_half_width),
            oracle_dt_eps: over.oracle_dt_eps.or(self.oracle_dt_eps),
            tau_list: over.tau_list.or(self.tau_list),
        }
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub angles: BlochAngles,
    pub eps_tau1: f64,
    pub eps_tau2: f64,
    pub times: InteractionTimes,
    pub seed: u64,
    pub shots: u64,
    pub map_grid: SurfaceGrid,
    pub oracle_grid: GridSpec,
    pub tau_list: Vec<f64>,
}

impl RunConfig {
    /// Reference parameters, θ = π/2, φ = 0, `ετ₁ = ετ₂ = 10`.
    pub fn defaults() -> ConfigLayer {
        let p = PhysicalParams::reference();
        ConfigLayer {
            mass: Some(p.mass()),
            coupling: Some(p.coupling()),
            wavelength: Some(p.wavelength()),
            sigma_x: Some(p.sigma_x()),
            theta: Some(std::f64::consts::FRAC_PI_2),
            phi: Some(0.0),
            eps_tau1: Some(10.0),
            eps_tau2: Some(10.0),
            seed: Some(0),
            shots: Some(100_000),
            map_half_width: Some(10.0),
            map_points: Some(201),
            oracle_points: Some(4096),
            oracle_half_width: Some(20.0),
            oracle_dt_eps: Some(1e-3),
            tau_list: Some(vec![1.0, 5.0, 8.0, 10.0]),
        }
    }

    /// Defaults, then the optional file, then `flags`.
    pub fn resolve(file: Option<&Path>, flags: ConfigLayer) -> Result<Self, ConfigError> {
        let mut layer = Self::defaults();
        if let Some(path) = file {
            layer = layer.overridden_by(ConfigLayer::from_json_file(path)?);
        }
        Self::from_layer(layer.overridden_by(flags))
    }

    pub fn from_layer(layer: ConfigLayer) -> Result<Self, ConfigError> {
        let defaults = Self::defaults();
        let layer = defaults.overridden_by(layer);
        let get = |v: Option<f64>| v.expect("defaults set every field");
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());

        let params = PhysicalParams::new(
            get(layer.mass),
            get(layer.coupling),
            get(layer.wavelength),
            get(layer.sigma_x),
        )
        .map_err(|e| invalid(&e))?;
        let angles = BlochAngles::new(get(layer.theta), get(layer.phi)).map_err(|e| invalid(&e))?;
        let (eps_tau1, eps_tau2) = (get(layer.eps_tau1), get(layer.eps_tau2));
        let times =
            InteractionTimes::from_eps_tau(&params, eps_tau1, eps_tau2).map_err(|e| invalid(&e))?;

        let shots = layer.shots.unwrap_or(1);
        if shots == 0 {
            return Err(ConfigError::Invalid("shots must be at least 1".into()));
        }
        let map_grid =
            SurfaceGrid::square(get(layer.map_half_width), layer.map_points.unwrap_or(0));
        map_grid
            .validate()
            .map_err(|e: FidelityError| invalid(&e))?;
        let oracle_grid = GridSpec::symmetric(
            get(layer.oracle_half_width),
            layer.oracle_points.unwrap_or(0),
            get(layer.oracle_dt_eps) / params.coupling(),
        );
        oracle_grid.validate().map_err(|e| invalid(&e))?;
        let tau_list = layer.tau_list.unwrap_or_default();
        if tau_list.is_empty() || tau_list.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(ConfigError::Invalid(format!(
                "tau list must be non-empty with finite ετ ≥ 0, got {tau_list:?}"
            )));
        }

        Ok(Self {
            params,
            angles,
            eps_tau1,
            eps_tau2,
            times,
            seed: layer.seed.unwrap_or(0),
            shots,
            map_grid,
            oracle_grid,
            tau_list,
        })
    }
}
