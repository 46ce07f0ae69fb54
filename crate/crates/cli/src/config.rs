//! Scenario configuration: one JSON document, every field optional with a
//! documented default, unknown fields rejected.

use launchsde::analytic::{ObjectiveBias, UpdateBias};
use launchsde::model::{DecisionRule, EffectMode, SystemParams};
use launchsde::montecarlo::{Scenario, SimSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::error::CliError;

/// Snapshot count used when `record_at` is not given.
const DEFAULT_SNAPSHOTS: usize = 1001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub r: f64,
    pub sigma: f64,
    pub optimum: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            sigma: 100.0,
            optimum: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuleConfig {
    pub alpha: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self { alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub steps: u64,
    pub replicas: usize,
    pub seed: u64,
    /// Defaults to 1001 evenly spaced steps from 0 to `steps`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_at: Option<Vec<u64>>,
    pub effect_mode: EffectMode,
    pub x0: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            steps: 10_000,
            replicas: 2_000,
            seed: 0,
            record_at: None,
            effect_mode: EffectMode::Gradient,
            x0: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateBiasConfig {
    pub gamma_r: f64,
    pub gamma_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveBiasConfig {
    pub r_prime: f64,
    pub sigma_prime: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub system: SystemConfig,
    pub rule: RuleConfig,
    pub sim: SimConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub update_bias: Option<UpdateBiasConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective_bias: Option<ObjectiveBiasConfig>,
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub x0: Option<f64>,
    pub steps: Option<u64>,
    pub replicas: Option<usize>,
}

/// A config whose fields have passed every model-level check.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ScenarioConfig,
    pub sys: SystemParams,
    pub rule: DecisionRule,
    pub spec: SimSpec,
    pub scenario: Scenario,
}

impl ScenarioConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.sim.seed = v;
        }
        if let Some(v) = o.alpha {
            self.rule.alpha = v;
        }
        if let Some(v) = o.x0 {
            self.sim.x0 = v;
        }
        if let Some(v) = o.steps {
            self.sim.steps = v;
            // A schedule written for another horizon no longer applies.
            if self
                .sim
                .record_at
                .as_ref()
                .is_some_and(|r| r.last().is_some_and(|&s| s > v))
            {
                self.sim.record_at = None;
            }
        }
        if let Some(v) = o.replicas {
            self.sim.replicas = v;
        }
    }

    /// Validates every field and fills in the snapshot schedule.
    pub fn resolve(mut self) -> Result<Resolved, CliError> {
        let sys = SystemParams::new(self.system.r, self.system.sigma, self.system.optimum)
            .map_err(|e| CliError::Config(format!("system: {e}")))?;
        let rule = DecisionRule::from_alpha(self.rule.alpha)
            .map_err(|e| CliError::Config(format!("rule: {e}")))?;
        let scenario = match (&self.update_bias, &self.objective_bias) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "update_bias and objective_bias are mutually exclusive".into(),
                ))
            }
            (Some(b), None) => Scenario::UpdateBias(
                UpdateBias::new(b.gamma_r, b.gamma_sigma)
                    .map_err(|e| CliError::Config(format!("update_bias: {e}")))?,
            ),
            (None, Some(b)) => Scenario::ObjectiveBias(
                ObjectiveBias::new(b.r_prime, b.sigma_prime, b.mu)
                    .map_err(|e| CliError::Config(format!("objective_bias: {e}")))?,
            ),
            (None, None) => Scenario::Baseline,
        };
        let record_at = self
            .sim
            .record_at
            .get_or_insert_with(|| SimSpec::even_schedule(self.sim.steps, DEFAULT_SNAPSHOTS))
            .clone();
        let spec = SimSpec {
            steps: self.sim.steps,
            replicas: self.sim.replicas,
            seed: self.sim.seed,
            record_at,
            effect_mode: self.sim.effect_mode,
            x0: self.sim.x0,
        };
        spec.validate().map_err(CliError::from_sim)?;
        Ok(Resolved {
            config: self,
            sys,
            rule,
            spec,
            scenario,
        })
    }
}

impl Resolved {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.config).expect("config serializes")
    }

    /// SHA-256 of the compact resolved config.
    pub fn sha256(&self) -> String {
        let compact = serde_json::to_string(&self.config).expect("config serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }
}
