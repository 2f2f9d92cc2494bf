//! Experiment configuration, read from JSON.
//!
//! Keys are the lower_snake_case field names below; unknown keys are rejected.
//!
//! ```json
//! {
//!   "n": 2,
//!   "delta": 0.4,
//!   "lower_bound_instance": true,
//!   "algorithms": [{ "kind": "fixed_mw", "eta": 0.2 }, { "kind": "adaptive_ftrl" }],
//!   "corruption": "front_load",
//!   "budgets": [0, 50],
//!   "horizon": 50000,
//!   "trials": 100,
//!   "base_seed": 7,
//!   "checkpoints": [25000, 50000],
//!   "output": "results.csv"
//! }
//! ```

use std::path::{Path, PathBuf};

use robust_hedge_core::{LearnerKind, StepSchedule, StochasticSpec};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const DEFAULT_HORIZON: u64 = 100_000;
pub const DEFAULT_TRIALS: u64 = 100;
pub const DEFAULT_BUDGETS: [f64; 4] = [0.0, 50.0, 100.0, 200.0];
/// Gap grid of the regret-versus-corruption figure.
pub const FIGURE_DELTAS: [f64; 4] = [0.05, 0.15, 0.25, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionConfig {
    None,
    FrontLoad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub kind: String,
    /// Fixed step size; `fixed_mw` falls back to `delta / 2` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Scale of `alpha / sqrt(t)`; defaults to `sqrt(ln N)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl AlgorithmConfig {
    pub fn new(kind: LearnerKind) -> Self {
        AlgorithmConfig {
            kind: kind.name().to_owned(),
            eta: None,
            alpha: None,
        }
    }

    pub fn fixed(eta: f64) -> Self {
        AlgorithmConfig {
            eta: Some(eta),
            ..Self::new(LearnerKind::FixedMw)
        }
    }

    pub fn learner_kind(&self) -> Result<LearnerKind> {
        LearnerKind::from_name(&self.kind)
            .ok_or_else(|| HarnessError::Config(format!("unknown algorithm kind {:?}", self.kind)))
    }

    /// Resolves the step schedule for an environment with `n` experts and gap `delta`.
    pub fn schedule(&self, n: usize, delta: f64) -> Result<StepSchedule> {
        let kind = self.learner_kind()?;
        let schedule = match (kind, self.eta, self.alpha) {
            (_, Some(_), Some(_)) => {
                return Err(HarnessError::Config(format!(
                    "{}: give eta or alpha, not both",
                    self.kind
                )))
            }
            (LearnerKind::FixedMw, None, Some(_)) => {
                return Err(HarnessError::Config("fixed_mw takes eta, not alpha".into()))
            }
            (LearnerKind::FixedMw, None, None) => StepSchedule::fixed(delta / 2.0)?,
            (_, Some(eta), None) => StepSchedule::fixed(eta)?,
            (_, None, Some(alpha)) => StepSchedule::adaptive(alpha)?,
            (_, None, None) => StepSchedule::default_adaptive(n)?,
        };
        Ok(schedule)
    }
}

fn default_n() -> usize {
    2
}

fn default_algorithms() -> Vec<AlgorithmConfig> {
    vec![
        AlgorithmConfig::new(LearnerKind::AdaptiveFtrl),
        AlgorithmConfig::new(LearnerKind::AdaptiveOmd),
    ]
}

fn default_corruption() -> CorruptionConfig {
    CorruptionConfig::FrontLoad
}

fn default_budgets() -> Vec<f64> {
    DEFAULT_BUDGETS.to_vec()
}

fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    /// Explicit expert means; excludes `delta` and `deltas`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Gap grid for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    /// Two experts at `(1 -+ delta) / 2` with integer front-load budgets.
    #[serde(default)]
    pub lower_bound_instance: bool,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default = "default_corruption")]
    pub corruption: CorruptionConfig,
    #[serde(default = "default_budgets")]
    pub budgets: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub base_seed: u64,
    /// Rounds at which aggregates are emitted; powers of two and `horizon` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: default_n(),
            means: None,
            delta: None,
            deltas: None,
            lower_bound_instance: false,
            algorithms: default_algorithms(),
            corruption: default_corruption(),
            budgets: default_budgets(),
            horizon: DEFAULT_HORIZON,
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            checkpoints: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| HarnessError::ConfigParse {
            path: path.to_owned(),
            source,
        })
    }

    /// Checkpoint rounds, defaulted and validated.
    pub fn checkpoint_rounds(&self) -> Result<Vec<u64>> {
        let rounds = match &self.checkpoints {
            Some(c) => c.clone(),
            None => {
                let mut c: Vec<u64> = (0..64).map(|k| 1u64 << k).take_while(|&t| t < self.horizon).collect();
                c.push(self.horizon);
                c
            }
        };
        if rounds.is_empty() {
            return Err(HarnessError::Config("checkpoints must not be empty".into()));
        }
        if rounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config("checkpoints must be strictly increasing".into()));
        }
        if rounds[0] == 0 || *rounds.last().unwrap() > self.horizon {
            return Err(HarnessError::Config("checkpoints must lie in 1..=horizon".into()));
        }
        Ok(rounds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(HarnessError::Config("horizon must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(HarnessError::Config("n must be at least 2".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::Config("at least one algorithm is required".into()));
        }
        if self.budgets.is_empty() {
            return Err(HarnessError::Config("budgets must not be empty".into()));
        }
        for &c in &self.budgets {
            if !(c.is_finite() && c >= 0.0) {
                return Err(HarnessError::Config(format!(
                    "corruption budget {c} must be finite and >= 0"
                )));
            }
            if self.corruption == CorruptionConfig::None && c != 0.0 {
                return Err(HarnessError::Config("corruption \"none\" only admits budget 0".into()));
            }
            if self.lower_bound_instance && c.fract() != 0.0 {
                return Err(HarnessError::Config(
                    "lower-bound instance needs integer budgets".into(),
                ));
            }
        }
        if self.lower_bound_instance && (self.n != 2 || self.means.is_some()) {
            return Err(HarnessError::Config(
                "lower-bound instance has exactly two experts given by delta".into(),
            ));
        }
        let sources = [self.means.is_some(), self.delta.is_some(), self.deltas.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(HarnessError::Config("give exactly one of means, delta, deltas".into()));
        }
        if let Some(means) = &self.means {
            if means.len() != self.n {
                return Err(HarnessError::Config(format!(
                    "n = {} but {} means were given",
                    self.n,
                    means.len()
                )));
            }
        }
        self.checkpoint_rounds()?;
        for env in self.environments()? {
            for a in &self.algorithms {
                a.schedule(env.experts(), env.gap())?;
            }
        }
        Ok(())
    }

    /// Environments in output order: one per gap, or the explicit means.
    pub fn environments(&self) -> Result<Vec<StochasticSpec>> {
        if let Some(means) = &self.means {
            return Ok(vec![StochasticSpec::new(means.clone())?]);
        }
        let deltas = match (&self.delta, &self.deltas) {
            (Some(d), _) => vec![*d],
            (None, Some(ds)) if !ds.is_empty() => ds.clone(),
            _ => return Err(HarnessError::Config("no environment given".into())),
        };
        deltas
            .into_iter()
            .map(|d| StochasticSpec::with_gap(self.n, d).map_err(Into::into))
            .collect()
    }
}
