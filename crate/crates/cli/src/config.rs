//! Experiment configuration: domain, field, suite selection and overrides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use schwarz_core::DomainSpec;

#[derive(Debug, Error)]
pub enum RunError {
    /// Invalid configuration or usage; maps to exit code 64.
    #[error("config error: {0}")]
    Config(String),
    /// Failure while executing suites; maps to exit code 1.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl RunError {
    pub fn config(msg: impl Into<String>) -> Self {
        RunError::Config(msg.into())
    }

    pub fn runtime(err: impl std::fmt::Display) -> Self {
        RunError::Runtime(err.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    pub field: FieldSpec,
    pub suites: Vec<String>,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "default_lorentz_p")]
    pub lorentz_p: Vec<f64>,
    #[serde(default)]
    pub tolerance: ToleranceOverrides,
}

fn default_betas() -> Vec<f64> {
    vec![1.0]
}

fn default_lorentz_p() -> Vec<f64> {
    vec![1.0, 2.0]
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ToleranceOverrides {
    /// Replaces the slack coefficient of comparison verdicts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison_slack: Option<f64>,
    /// Relative residual target of the Robin solver (default 1e-10).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSpec {
    /// One of `expression`, `preset`, `random-smooth`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::config(format!("bad config JSON: {e}")))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.suites.is_empty() {
            return Err(RunError::config("at least one suite must be selected"));
        }
        for name in &self.suites {
            if crate::suites::find(name).is_none() {
                let known: Vec<&str> =
                    crate::suites::registry().iter().map(|s| s.name()).collect();
                return Err(RunError::config(format!(
                    "unknown suite {name:?}; known suites: {}",
                    known.join(", ")
                )));
            }
        }
        match self.field.kind.as_str() {
            "expression" => {
                let expr = self
                    .field
                    .params
                    .get("expr")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| {
                        RunError::config("expression field needs params.expr (a string)")
                    })?;
                crate::expr::parse(expr).map_err(RunError::Config)?;
            }
            "preset" => {
                let name = self
                    .field
                    .params
                    .get("name")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| RunError::config("preset field needs params.name"))?;
                if !crate::fields::PRESETS.contains(&name) {
                    return Err(RunError::config(format!(
                        "unknown preset {name:?}; known presets: {}",
                        crate::fields::PRESETS.join(", ")
                    )));
                }
            }
            "random-smooth" => {
                if self.field.seed.is_none() {
                    return Err(RunError::config("random-smooth field requires a seed"));
                }
            }
            other => {
                return Err(RunError::config(format!(
                    "unknown field kind {other:?}; expected expression, preset or random-smooth"
                )));
            }
        }
        if !(self.domain.h.is_finite() && self.domain.h > 0.0) {
            return Err(RunError::config("grid spacing h must be positive"));
        }
        for &b in &self.betas {
            if !(b.is_finite() && b > 0.0) {
                return Err(RunError::config(format!("beta must be positive, got {b}")));
            }
        }
        for &p in &self.lorentz_p {
            if !(p.is_finite() && p >= 1.0) {
                return Err(RunError::config(format!("lorentz_p entries must be >= 1, got {p}")));
            }
        }
        if let Some(s) = self.tolerance.comparison_slack {
            if !(s.is_finite() && s > 0.0) {
                return Err(RunError::config("comparison_slack must be positive"));
            }
        }
        if let Some(t) = self.tolerance.solver_tol {
            if !(t.is_finite() && t > 0.0 && t < 1.0) {
                return Err(RunError::config("solver_tol must be in (0, 1)"));
            }
        }
        Ok(())
    }
}
