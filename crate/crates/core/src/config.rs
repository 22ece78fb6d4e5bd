//! Run configuration, loaded from JSON and validated at load time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::{BoundaryError, BoundaryParams};
use crate::transfer::{default_theta, Boundary, ChainSpec, TransferError};

/// Largest chain length accepted by any command.
pub const MAX_SITES: usize = 4;

/// A rejected configuration, with the path of the offending field.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    #[default]
    Periodic,
    Open,
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Periodic => "periodic",
            BoundaryKind::Open => "open",
        })
    }
}

impl FromStr for BoundaryKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "periodic" => Ok(BoundaryKind::Periodic),
            "open" => Ok(BoundaryKind::Open),
            other => Err(ConfigError::new("boundary", format!("expected periodic or open, got '{other}'"))),
        }
    }
}

fn default_sites() -> usize {
    2
}

fn default_params() -> BoundaryParams {
    BoundaryParams::fixture(-1, 1)
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_samples() -> usize {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_sites")]
    pub n_sites: usize,
    /// Inhomogeneities; `0.3 + 0.37 (j - 1)` when absent.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub boundary: BoundaryKind,
    #[serde(default = "default_params")]
    pub boundary_params: BoundaryParams,
    /// Tolerance for checks without a dedicated threshold.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Random samples per boundary identity and parameter set.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Record wall-clock times in reports; off by default so that reports
    /// are byte-identical across runs.
    #[serde(default)]
    pub record_timings: bool,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_sites: default_sites(),
            theta: None,
            boundary: BoundaryKind::Periodic,
            boundary_params: default_params(),
            tolerance: default_tolerance(),
            samples: default_samples(),
            seed: 0,
            record_timings: false,
            output_path: None,
        }
    }
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_sites == 0 || self.n_sites > MAX_SITES {
            return Err(ConfigError::new("n_sites", format!("must be between 1 and {MAX_SITES}, got {}", self.n_sites)));
        }
        if let Some(theta) = &self.theta {
            if theta.len() != self.n_sites {
                return Err(ConfigError::new(
                    "theta",
                    format!("has {} entries but n_sites is {}", theta.len(), self.n_sites),
                ));
            }
            if let Some(k) = theta.iter().position(|t| !t.is_finite()) {
                return Err(ConfigError::new(format!("theta[{k}]"), "must be finite"));
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(ConfigError::new("tolerance", "must be positive and finite"));
        }
        if self.samples == 0 {
            return Err(ConfigError::new("samples", "must be at least 1"));
        }
        let p = &self.boundary_params;
        p.validate().map_err(|e| {
            let field = match &e {
                BoundaryError::NegativeDiscriminant { field, .. } => format!("boundary_params.({field})"),
                BoundaryError::ZeroCoupling(f) | BoundaryError::BadSign(f) | BoundaryError::NotFinite(f) => {
                    format!("boundary_params.{f}")
                }
                BoundaryError::Tensor(_) => "boundary_params".into(),
            };
            ConfigError::new(field, e.to_string())
        })?;
        if (p.c2.abs() - 2.0).abs() < 1e-12 {
            return Err(ConfigError::new(
                "boundary_params.c2",
                format!("c2 = {} is not allowed: c2 must differ from +-2, otherwise K(0) = (4 - c2^2)/2 vanishes", p.c2),
            ));
        }
        self.chain_spec().map(|_| ())
    }

    pub fn boundary(&self) -> Boundary {
        match self.boundary {
            BoundaryKind::Periodic => Boundary::Periodic,
            BoundaryKind::Open => Boundary::Open(self.boundary_params),
        }
    }

    pub fn chain_spec(&self) -> Result<ChainSpec, ConfigError> {
        let theta = self.theta.clone().unwrap_or_else(|| default_theta(self.n_sites));
        ChainSpec::new(theta, self.boundary()).map_err(|e| match e {
            TransferError::DegenerateTheta { i, j, .. } => ConfigError::new(format!("theta[{i}], theta[{j}]"), e.to_string()),
            other => ConfigError::new("theta", other.to_string()),
        })
    }

    /// The same chain with all inhomogeneities zero.
    pub fn homogeneous_spec(&self) -> ChainSpec {
        ChainSpec::homogeneous(self.n_sites, self.boundary())
    }
}
