//! Experiment and sweep configuration files.
//!
//! Both are flat TOML documents with a `version` field:
//!
//! ```toml
//! version = 1
//! env = "acrobot"
//! rule = "nrl"
//! hidden_layers = [64]
//! episodes = 8000
//! seeds = [0, 1, 2, 3, 4]
//! eta = 0.05
//! sigma = 0.001
//! lambda = 0.66
//! normalize_rpe = false
//! output_dir = "runs/acrobot-nrl"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::numerics::DEFAULT_LEAKY_SLOPE;
use crate::rules::{RuleConfig, RuleKind};

pub const CONFIG_VERSION: u32 = 1;

/// Where the reference ("clean") log-probability for `ρ` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleanMode {
    TrueClean,
    /// Mean output of this many extra noisy passes.
    AveragedNoisy(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanModeName {
    #[default]
    TrueClean,
    AveragedNoisy,
}

/// Which output distribution the action is sampled from. The exact rule
/// has no noisy pass and always samples from the clean output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSource {
    #[default]
    Noisy,
    Clean,
}

fn default_rpe_floor() -> f64 {
    1e-6
}

fn default_alpha() -> f64 {
    DEFAULT_LEAKY_SLOPE
}

fn default_passes() -> usize {
    1
}

fn default_window() -> usize {
    super::FINAL_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub env: EnvKind,
    pub rule: RuleKind,
    pub hidden_layers: Vec<usize>,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub eta: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub normalize_rpe: bool,
    #[serde(default = "default_rpe_floor")]
    pub rpe_floor: f64,
    #[serde(default)]
    pub clean_mode: CleanModeName,
    /// Passes averaged when `clean_mode = "averaged_noisy"`.
    #[serde(default = "default_passes")]
    pub noisy_passes: usize,
    #[serde(default)]
    pub action_source: ActionSource,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Overrides the environment's episode horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    /// Moving-average window for plots.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Dump every n-th episode's trajectory (0 disables).
    #[serde(default)]
    pub trajectory_every: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Default hyperparameters for an environment/rule pair: hidden
    /// width 64/64/128, `λ = 0.66`, five seeds, and per-rule `η`, `σ`.
    pub fn task_defaults(env: EnvKind, rule: RuleKind) -> Self {
        use EnvKind::*;
        use RuleKind::*;
        let (eta, sigma) = match (env, rule) {
            (Acrobot, Exact) => (5e-3, 0.0),
            (Acrobot, Nrl) => (5e-2, 1e-3),
            (Acrobot, Rmhl) => (5e-2, 1e-3),
            (Cartpole, Exact) => (5e-3, 0.0),
            (Cartpole, Nrl) => (5e-2, 1e-3),
            (Cartpole, Rmhl) => (1e-2, 1e-1),
            (Reaching, Exact) => (1e-2, 0.0),
            (Reaching, Nrl) => (1e-2, 1e-3),
            (Reaching, Rmhl) => (1e-1, 1e-1),
        };
        let (hidden, episodes, normalize_rpe) = match env {
            Acrobot => (64, 8000, false),
            Cartpole => (64, 20_000, true),
            Reaching => (128, 1000, false),
        };
        Self {
            version: CONFIG_VERSION,
            env,
            rule,
            hidden_layers: vec![hidden],
            episodes,
            seeds: (0..5).collect(),
            eta,
            sigma,
            lambda: 0.66,
            normalize_rpe,
            rpe_floor: default_rpe_floor(),
            clean_mode: CleanModeName::TrueClean,
            noisy_passes: 1,
            action_source: ActionSource::Noisy,
            alpha: DEFAULT_LEAKY_SLOPE,
            max_steps: None,
            window: default_window(),
            trajectory_every: 0,
            output_dir: PathBuf::from(format!("runs/{env}-{rule}")),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.version != CONFIG_VERSION {
            return fail(format!("unsupported config version {}", self.version));
        }
        if self.episodes == 0 {
            return fail("episodes must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        if self.hidden_layers.contains(&0) {
            return fail("hidden layer sizes must be positive".into());
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return fail(format!("lambda {} outside (0, 1]", self.lambda));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.clean_mode == CleanModeName::AveragedNoisy && self.noisy_passes == 0 {
            return fail("averaged_noisy needs noisy_passes >= 1".into());
        }
        if self.window == 0 {
            return fail("window must be at least 1".into());
        }
        if self.max_steps == Some(0) {
            return fail("max_steps must be at least 1".into());
        }
        self.rule_config().validate()
    }

    pub fn rule_config(&self) -> RuleConfig {
        RuleConfig {
            eta: self.eta,
            sigma: self.sigma,
            normalize_rpe: self.normalize_rpe,
            rpe_floor: self.rpe_floor,
        }
    }

    pub fn clean_mode(&self) -> CleanMode {
        match self.clean_mode {
            CleanModeName::TrueClean => CleanMode::TrueClean,
            CleanModeName::AveragedNoisy => CleanMode::AveragedNoisy(self.noisy_passes),
        }
    }

    pub fn set_clean_mode(&mut self, mode: CleanMode) {
        match mode {
            CleanMode::TrueClean => {
                self.clean_mode = CleanModeName::TrueClean;
                self.noisy_passes = 1;
            }
            CleanMode::AveragedNoisy(n) => {
                self.clean_mode = CleanModeName::AveragedNoisy;
                self.noisy_passes = n;
            }
        }
    }

    /// `env-rule-h64x64` style tag.
    pub fn tag(&self) -> String {
        let hidden: Vec<String> = self.hidden_layers.iter().map(|h| h.to_string()).collect();
        format!("{}-{}-h{}", self.env, self.rule, hidden.join("x"))
    }
}

/// A sweep: the cross product of environments, rules, and depths, each
/// cell starting from [`ExperimentConfig::task_defaults`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub version: u32,
    pub envs: Vec<EnvKind>,
    pub rules: Vec<RuleKind>,
    pub hidden_layers: Vec<Vec<usize>>,
    #[serde(default)]
    pub episodes: Option<usize>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    pub output_dir: PathBuf,
}

impl GridConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let grid: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if grid.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported grid version {}",
                grid.version
            )));
        }
        if grid.envs.is_empty() || grid.rules.is_empty() || grid.hidden_layers.is_empty() {
            return Err(Error::Config("grid axes must be non-empty".into()));
        }
        for cell in grid.cells() {
            cell.validate()?;
        }
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut cells = Vec::new();
        for &env in &self.envs {
            for &rule in &self.rules {
                for hidden in &self.hidden_layers {
                    let mut cfg = ExperimentConfig::task_defaults(env, rule);
                    cfg.hidden_layers = hidden.clone();
                    if let Some(e) = self.episodes {
                        cfg.episodes = e;
                    }
                    if let Some(s) = &self.seeds {
                        cfg.seeds = s.clone();
                    }
                    cfg.output_dir = self.output_dir.join(cfg.tag());
                    cells.push(cfg);
                }
            }
        }
        cells
    }
}
