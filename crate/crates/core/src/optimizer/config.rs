//! Optimizer configuration and its `key=value` file format.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::Aabb;

/// Hyperparameters of both optimization stages.
///
/// Defaults follow the reference setup: collision and regularization weights
/// of 0.1, a 1e-2 step for the quaternion-parameterized reset stage and a
/// 1e-3 step for the Euler-parameterized delta stage.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Weight of the repulsive observation term in the reset objective.
    pub lambda_c: f64,
    /// Weight of the per-step delta-magnitude regularizer.
    pub lambda_r: f64,
    /// Base gradient step for the reset stage.
    pub reset_step_size: f64,
    /// Base gradient step for the delta stage.
    pub delta_step_size: f64,
    /// Number of random restarts for the reset stage.
    pub num_inits: usize,
    /// Iteration budget per reset init.
    pub reset_iterations: usize,
    /// Iteration budget for the joint delta descent.
    pub delta_iterations: usize,
    /// Box for sampling init translations; defaults to the bounding box of
    /// the first generated frame united with the observation, inflated 0.2 m.
    pub init_translation_bounds: Option<Aabb>,
    /// Seed for init sampling; each init draws from its own RNG stream.
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            lambda_c: 0.1,
            lambda_r: 0.1,
            reset_step_size: 1e-2,
            delta_step_size: 1e-3,
            num_inits: 32,
            reset_iterations: 300,
            delta_iterations: 500,
            init_translation_bounds: None,
            rng_seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("lambda_c", self.lambda_c), ("lambda_r", self.lambda_r)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::argument(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("reset_step_size", self.reset_step_size),
            ("delta_step_size", self.delta_step_size),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::argument(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("num_inits", self.num_inits),
            ("reset_iterations", self.reset_iterations),
            ("delta_iterations", self.delta_iterations),
        ] {
            if value == 0 {
                return Err(Error::argument(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses `key=value` lines; `#` comments and blank lines are ignored.
    /// Every key is optional, unknown or duplicate keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = OptimizerConfig::default();
        let mut seen: Vec<String> = Vec::new();
        let mut bounds_min: Option<Vector3<f64>> = None;
        let mut bounds_max: Option<Vector3<f64>> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::argument(format!(
                    "config line {}: expected `key=value`, got `{line}`",
                    idx + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::argument(format!(
                    "config line {}: duplicate key `{key}`",
                    idx + 1
                )));
            }
            seen.push(key.to_string());

            match key {
                "lambda_c" => cfg.lambda_c = parse_float(key, value, idx)?,
                "lambda_r" => cfg.lambda_r = parse_float(key, value, idx)?,
                "reset_step_size" => cfg.reset_step_size = parse_float(key, value, idx)?,
                "delta_step_size" => cfg.delta_step_size = parse_float(key, value, idx)?,
                "num_inits" => cfg.num_inits = parse_int(key, value, idx)?,
                "reset_iterations" => cfg.reset_iterations = parse_int(key, value, idx)?,
                "delta_iterations" => cfg.delta_iterations = parse_int(key, value, idx)?,
                "rng_seed" => {
                    cfg.rng_seed = value.parse().map_err(|_| {
                        Error::argument(format!(
                            "config line {}: cannot parse `{value}` as a seed",
                            idx + 1
                        ))
                    })?;
                }
                "init_bounds_min" => bounds_min = Some(parse_triple(key, value, idx)?),
                "init_bounds_max" => bounds_max = Some(parse_triple(key, value, idx)?),
                unknown => {
                    return Err(Error::argument(format!(
                        "config line {}: unknown key `{unknown}`",
                        idx + 1
                    )));
                }
            }
        }

        cfg.init_translation_bounds = match (bounds_min, bounds_max) {
            (None, None) => None,
            (Some(min), Some(max)) => Some(Aabb::new(min, max)?),
            _ => {
                return Err(Error::argument(
                    "init_bounds_min and init_bounds_max must be given together",
                ));
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_float(key: &str, value: &str, idx: usize) -> Result<f64> {
    value.parse().map_err(|_| {
        Error::argument(format!(
            "config line {}: cannot parse `{value}` for `{key}`",
            idx + 1
        ))
    })
}

fn parse_int(key: &str, value: &str, idx: usize) -> Result<usize> {
    value.parse().map_err(|_| {
        Error::argument(format!(
            "config line {}: cannot parse `{value}` for `{key}`",
            idx + 1
        ))
    })
}

fn parse_triple(key: &str, value: &str, idx: usize) -> Result<Vector3<f64>> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::argument(format!(
            "config line {}: `{key}` expects three numbers, got `{value}`",
            idx + 1
        )));
    }
    let mut out = [0.0f64; 3];
    for (slot, token) in out.iter_mut().zip(&parts) {
        *slot = token.parse().map_err(|_| {
            Error::argument(format!(
                "config line {}: cannot parse `{token}` for `{key}`",
                idx + 1
            ))
        })?;
    }
    Ok(Vector3::new(out[0], out[1], out[2]))
}
