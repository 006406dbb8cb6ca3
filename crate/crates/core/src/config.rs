//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` comments, unknown keys rejected with their
//! line number. Every run artifact embeds the hash of the canonical
//! serialization (all keys, fixed order, round-trip float rendering), so two
//! artifacts with equal hashes were produced by identical configurations.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::{CircuitTopology, SigmoidSign};
use crate::env::{EnvParams, TaskMode};
use crate::mapping::{Interface, MappingError, MotorMapping, ObservedVariable, SensoryMapping};
use crate::search::{EstimatorMode, SearchConfig};
use crate::solver::SolverConfig;

/// Sensory neuron pair and range for one observed variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorPairConfig {
    pub pos: String,
    pub neg: String,
    pub min: f64,
    pub max: f64,
}

/// Motor neuron pair and action range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorPairConfig {
    pub pos: String,
    pub neg: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: String,
    /// Path of the wiring file; `None` uses the built-in tap-withdrawal wiring.
    pub wiring: Option<String>,
    pub env: EnvParams,
    pub solver: SolverConfig,
    pub sigmoid_sign: SigmoidSign,
    pub phi: SensorPairConfig,
    pub phi_dot: SensorPairConfig,
    pub action: MotorPairConfig,
    pub episodes_per_estimate: usize,
    pub k_worst: usize,
    pub reuse_limit: u32,
    pub max_iterations: Option<u64>,
    pub max_wall_clock_s: Option<f64>,
    pub perturbation_scale: f64,
    pub estimator: EstimatorMode,
    pub checkpoint_interval: u64,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            out_dir: "out".into(),
            wiring: None,
            env: EnvParams::default(),
            solver: SolverConfig::default(),
            sigmoid_sign: SigmoidSign::default(),
            phi: SensorPairConfig { pos: "PLM".into(), neg: "AVM".into(), min: -0.2, max: 0.2 },
            phi_dot: SensorPairConfig { pos: "ALM".into(), neg: "PVD".into(), min: -2.0, max: 2.0 },
            action: MotorPairConfig { pos: "FWD".into(), neg: "REV".into(), min: -1.0, max: 1.0 },
            episodes_per_estimate: 10,
            k_worst: 3,
            reuse_limit: 10,
            max_iterations: Some(2000),
            max_wall_clock_s: Some(1800.0),
            perturbation_scale: 0.05,
            estimator: EstimatorMode::KWorst,
            checkpoint_interval: 100,
            jobs: 1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl RunConfig {
    /// Apply `key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        config.apply_text(text)?;
        Ok(config)
    }

    /// Apply `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            self.apply(key.trim(), value.trim())
                .map_err(|message| ConfigError::Parse { line, message })?;
        }
        Ok(())
    }

    /// Apply one `key`/`value` pair (also used for command-line overrides).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(value: &str, what: &str) -> Result<T, String> {
            value.parse().map_err(|_| format!("invalid {what}: `{value}`"))
        }
        fn opt_u64(value: &str) -> Result<Option<u64>, String> {
            if value == "none" { Ok(None) } else { num(value, "integer").map(Some) }
        }
        fn opt_f64(value: &str) -> Result<Option<f64>, String> {
            if value == "none" { Ok(None) } else { num(value, "number").map(Some) }
        }
        fn boolean(value: &str) -> Result<bool, String> {
            match value {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(format!("invalid boolean: `{other}`")),
            }
        }
        match key {
            "seed" => self.seed = num(value, "integer")?,
            "out_dir" => self.out_dir = value.to_string(),
            "wiring" => {
                self.wiring = if value == "builtin" { None } else { Some(value.to_string()) }
            }
            "env.cart_mass" => self.env.cart_mass = num(value, "number")?,
            "env.pole_mass" => self.env.pole_mass = num(value, "number")?,
            "env.pole_half_length" => self.env.pole_half_length = num(value, "number")?,
            "env.gravity" => self.env.gravity = num(value, "number")?,
            "env.force_max" => self.env.force_max = num(value, "number")?,
            "env.track_limit" => self.env.track_limit = num(value, "number")?,
            "env.track_limit_enabled" => self.env.track_limit_enabled = boolean(value)?,
            "env.angle_limit" => self.env.angle_limit = num(value, "number")?,
            "env.horizon" => self.env.horizon = num(value, "integer")?,
            "env.dt" => self.env.dt = num(value, "number")?,
            "env.init_angle_spread" => self.env.init_angle_spread = num(value, "number")?,
            "env.mode" => {
                self.env.mode = match value {
                    "stabilize" => TaskMode::Stabilize,
                    "swingup" => TaskMode::Swingup,
                    other => return Err(format!("invalid mode `{other}` (stabilize or swingup)")),
                }
            }
            "solver.dt" => self.solver.dt = num(value, "number")?,
            "solver.substeps" => self.solver.substeps_per_env_step = num(value, "integer")?,
            "circuit.sigmoid_sign" => {
                self.sigmoid_sign = match value {
                    "increasing" => SigmoidSign::Increasing,
                    "decreasing" => SigmoidSign::Decreasing,
                    other => return Err(format!("invalid sigmoid sign `{other}` (increasing or decreasing)")),
                }
            }
            "map.phi.pos" => self.phi.pos = value.to_string(),
            "map.phi.neg" => self.phi.neg = value.to_string(),
            "map.phi.min" => self.phi.min = num(value, "number")?,
            "map.phi.max" => self.phi.max = num(value, "number")?,
            "map.phi_dot.pos" => self.phi_dot.pos = value.to_string(),
            "map.phi_dot.neg" => self.phi_dot.neg = value.to_string(),
            "map.phi_dot.min" => self.phi_dot.min = num(value, "number")?,
            "map.phi_dot.max" => self.phi_dot.max = num(value, "number")?,
            "map.action.pos" => self.action.pos = value.to_string(),
            "map.action.neg" => self.action.neg = value.to_string(),
            "map.action.min" => self.action.min = num(value, "number")?,
            "map.action.max" => self.action.max = num(value, "number")?,
            "search.episodes" => self.episodes_per_estimate = num(value, "integer")?,
            "search.k_worst" => self.k_worst = num(value, "integer")?,
            "search.reuse_limit" => self.reuse_limit = num(value, "integer")?,
            "search.max_iterations" => self.max_iterations = opt_u64(value)?,
            "search.max_wall_clock_s" => self.max_wall_clock_s = opt_f64(value)?,
            "search.perturbation_scale" => self.perturbation_scale = num(value, "number")?,
            "search.estimator" => {
                self.estimator = match value {
                    "k_worst" => EstimatorMode::KWorst,
                    "mean" => EstimatorMode::Mean,
                    "min" => EstimatorMode::Min,
                    other => return Err(format!("invalid estimator `{other}` (k_worst, mean or min)")),
                }
            }
            "search.checkpoint_interval" => self.checkpoint_interval = num(value, "integer")?,
            "search.jobs" => self.jobs = num(value, "integer")?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Canonical text form: every key, fixed order, lossless float rendering.
    pub fn to_text(&self) -> String {
        let mode = match self.env.mode {
            TaskMode::Stabilize => "stabilize",
            TaskMode::Swingup => "swingup",
        };
        let sign = match self.sigmoid_sign {
            SigmoidSign::Increasing => "increasing",
            SigmoidSign::Decreasing => "decreasing",
        };
        let estimator = match self.estimator {
            EstimatorMode::KWorst => "k_worst",
            EstimatorMode::Mean => "mean",
            EstimatorMode::Min => "min",
        };
        let opt_u64 = |v: Option<u64>| v.map_or("none".to_string(), |x| x.to_string());
        let opt_f64 = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        format!(
            "seed = {}\n\
             out_dir = {}\n\
             wiring = {}\n\
             env.cart_mass = {}\n\
             env.pole_mass = {}\n\
             env.pole_half_length = {}\n\
             env.gravity = {}\n\
             env.force_max = {}\n\
             env.track_limit = {}\n\
             env.track_limit_enabled = {}\n\
             env.angle_limit = {}\n\
             env.horizon = {}\n\
             env.dt = {}\n\
             env.init_angle_spread = {}\n\
             env.mode = {}\n\
             solver.dt = {}\n\
             solver.substeps = {}\n\
             circuit.sigmoid_sign = {}\n\
             map.phi.pos = {}\n\
             map.phi.neg = {}\n\
             map.phi.min = {}\n\
             map.phi.max = {}\n\
             map.phi_dot.pos = {}\n\
             map.phi_dot.neg = {}\n\
             map.phi_dot.min = {}\n\
             map.phi_dot.max = {}\n\
             map.action.pos = {}\n\
             map.action.neg = {}\n\
             map.action.min = {}\n\
             map.action.max = {}\n\
             search.episodes = {}\n\
             search.k_worst = {}\n\
             search.reuse_limit = {}\n\
             search.max_iterations = {}\n\
             search.max_wall_clock_s = {}\n\
             search.perturbation_scale = {}\n\
             search.estimator = {}\n\
             search.checkpoint_interval = {}\n\
             search.jobs = {}\n",
            self.seed,
            self.out_dir,
            self.wiring.as_deref().unwrap_or("builtin"),
            self.env.cart_mass,
            self.env.pole_mass,
            self.env.pole_half_length,
            self.env.gravity,
            self.env.force_max,
            self.env.track_limit,
            self.env.track_limit_enabled,
            self.env.angle_limit,
            self.env.horizon,
            self.env.dt,
            self.env.init_angle_spread,
            mode,
            self.solver.dt,
            self.solver.substeps_per_env_step,
            sign,
            self.phi.pos,
            self.phi.neg,
            self.phi.min,
            self.phi.max,
            self.phi_dot.pos,
            self.phi_dot.neg,
            self.phi_dot.min,
            self.phi_dot.max,
            self.action.pos,
            self.action.neg,
            self.action.min,
            self.action.max,
            self.episodes_per_estimate,
            self.k_worst,
            self.reuse_limit,
            opt_u64(self.max_iterations),
            opt_f64(self.max_wall_clock_s),
            self.perturbation_scale,
            estimator,
            self.checkpoint_interval,
            self.jobs,
        )
    }

    /// SHA-256 of the canonical text, hex-encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.env.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.solver.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.search_config().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.checkpoint_interval == 0 {
            return Err(ConfigError::Invalid("search.checkpoint_interval must be at least 1".into()));
        }
        Ok(())
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            episodes_per_estimate: self.episodes_per_estimate,
            k_worst: self.k_worst,
            reuse_limit: self.reuse_limit,
            max_iterations: self.max_iterations,
            max_wall_clock: self.max_wall_clock_s.map(Duration::from_secs_f64),
            perturbation_scale: self.perturbation_scale,
            seed: self.seed,
            estimator: self.estimator,
            jobs: self.jobs,
        }
    }

    /// Resolve the mapping neuron names against a topology.
    pub fn interface(&self, topo: &CircuitTopology) -> Result<Interface, ConfigError> {
        let resolve = |name: &str| {
            topo.neuron_id(name).ok_or_else(|| {
                ConfigError::Invalid(format!("mapping references unknown neuron `{name}`"))
            })
        };
        let sensory = vec![
            SensoryMapping {
                variable: ObservedVariable::Phi,
                pos_neuron: resolve(&self.phi.pos)?,
                neg_neuron: resolve(&self.phi.neg)?,
                x_min: self.phi.min,
                x_max: self.phi.max,
            },
            SensoryMapping {
                variable: ObservedVariable::PhiDot,
                pos_neuron: resolve(&self.phi_dot.pos)?,
                neg_neuron: resolve(&self.phi_dot.neg)?,
                x_min: self.phi_dot.min,
                x_max: self.phi_dot.max,
            },
        ];
        let motor = MotorMapping {
            pos_neuron: resolve(&self.action.pos)?,
            neg_neuron: resolve(&self.action.neg)?,
            y_min: self.action.min,
            y_max: self.action.max,
        };
        Interface::new(sensory, motor, topo)
            .map_err(|e: MappingError| ConfigError::Invalid(e.to_string()))
    }
}
