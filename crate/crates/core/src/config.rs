//! Run configuration: a single flat JSON document.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ToleranceSettings;
use crate::params::{InitialEndowment, ModelParams};
use crate::verification::VerificationSettings;

/// Keys a sweep may range over, in the order that fixes the grid layout: the
/// first listed axis varies slowest.
pub const SWEEP_AXES: [&str; 9] = ["beta", "sigma", "rho", "delta", "gamma", "pi", "theta", "k0", "h0"];

fn default_horizon() -> f64 {
    200.0
}

fn default_output_step() -> f64 {
    0.1
}

fn default_compare_horizon() -> f64 {
    50.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub beta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub delta: f64,
    pub gamma: f64,
    pub pi: f64,
    pub theta: f64,
    pub k0: f64,
    pub h0: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_output_step")]
    pub output_step: f64,
    #[serde(default = "default_compare_horizon")]
    pub compare_horizon: f64,
    #[serde(default)]
    pub tolerances: ToleranceSettings,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Values per axis for the `sweep` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<BTreeMap<String, Vec<f64>>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Structural checks. Model parameters are validated separately, so that
    /// a sweep may start from an infeasible base point.
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        if !(self.output_step > 0.0 && self.output_step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "output_step must be > 0, got {}",
                self.output_step
            )));
        }
        if !(self.compare_horizon >= 0.0 && self.compare_horizon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "compare_horizon must be >= 0, got {}",
                self.compare_horizon
            )));
        }
        self.tolerances
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if let Some(sweep) = &self.sweep {
            for (axis, values) in sweep {
                if !SWEEP_AXES.contains(&axis.as_str()) {
                    return Err(Error::InvalidConfig(format!(
                        "unknown sweep axis {axis:?}; expected one of {SWEEP_AXES:?}"
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "sweep axis {axis} has a non-finite value"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            beta: self.beta,
            sigma: self.sigma,
            rho: self.rho,
            delta: self.delta,
            gamma: self.gamma,
            pi: self.pi,
            theta: self.theta,
        }
    }

    pub fn endowment(&self) -> Result<InitialEndowment> {
        InitialEndowment::new(self.k0, self.h0)
    }

    pub fn verification_settings(&self) -> VerificationSettings {
        VerificationSettings {
            horizon: self.horizon,
            compare_horizon: self.compare_horizon,
            ..VerificationSettings::default()
        }
    }

    fn set_axis(&mut self, axis: &str, value: f64) {
        let slot = match axis {
            "beta" => &mut self.beta,
            "sigma" => &mut self.sigma,
            "rho" => &mut self.rho,
            "delta" => &mut self.delta,
            "gamma" => &mut self.gamma,
            "pi" => &mut self.pi,
            "theta" => &mut self.theta,
            "k0" => &mut self.k0,
            "h0" => &mut self.h0,
            _ => unreachable!("axis names are checked in validate"),
        };
        *slot = value;
    }

    /// Axes present in the sweep, in grid order.
    pub fn sweep_axes(&self) -> Vec<&'static str> {
        let Some(sweep) = &self.sweep else {
            return Vec::new();
        };
        SWEEP_AXES.iter().copied().filter(|a| sweep.contains_key(*a)).collect()
    }

    /// Every grid point of the sweep as `(axis values, config)`. Values along
    /// each axis are visited in ascending order and the first axis varies
    /// slowest, so the points come out in lexicographic order.
    pub fn sweep_points(&self) -> Vec<(Vec<f64>, RunConfig)> {
        let Some(sweep) = &self.sweep else {
            return Vec::new();
        };
        let axes = self.sweep_axes();
        let ranges: Vec<Vec<f64>> = axes
            .iter()
            .map(|a| {
                let mut v = sweep[*a].clone();
                v.sort_by(f64::total_cmp);
                v
            })
            .collect();
        if ranges.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        let mut points = vec![Vec::new()];
        for range in &ranges {
            points = points
                .into_iter()
                .flat_map(|prefix: Vec<f64>| {
                    range.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        points
            .into_iter()
            .map(|values| {
                let mut config = self.clone();
                config.sweep = None;
                for (axis, &v) in axes.iter().zip(&values) {
                    config.set_axis(axis, v);
                }
                (values, config)
            })
            .collect()
    }
}
