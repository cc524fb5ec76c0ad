use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Running-average reward prediction `r̄ ← r̄ + λ (r − r̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardPredictor {
    r_bar: f64,
    lambda: f64,
}

impl RewardPredictor {
    /// Prediction starting at zero.
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_value(0.0, lambda).validated()
    }

    pub fn with_value(r_bar: f64, lambda: f64) -> Self {
        Self { r_bar, lambda }
    }

    fn validated(self) -> Result<Self> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Config(format!(
                "smoothing factor must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if !self.r_bar.is_finite() {
            return Err(Error::NonFinite("reward prediction"));
        }
        Ok(self)
    }

    pub fn value(&self) -> f64 {
        self.r_bar
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn update(&mut self, r: f64) {
        self.r_bar += self.lambda * (r - self.r_bar);
    }
}

/// Learning-rule hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    /// Learning rate η.
    pub eta: f64,
    /// Noise standard deviation σ. Unused by the exact rule.
    pub sigma: f64,
    /// Divide δ by `max(|r|, rpe_floor)`.
    pub normalize_rpe: bool,
    pub rpe_floor: f64,
}

impl RuleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::Config(format!("learning rate {} invalid", self.eta)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!("noise scale {} invalid", self.sigma)));
        }
        if !(self.rpe_floor.is_finite() && self.rpe_floor > 0.0) {
            return Err(Error::Config(format!("rpe floor {} invalid", self.rpe_floor)));
        }
        Ok(())
    }
}

/// Reward prediction error `δ = r − r̄`, optionally relative to `|r|`.
///
/// Uses the prediction as it stood before this reward; callers update the
/// predictor afterwards.
pub fn rpe(predictor: &RewardPredictor, r: f64, cfg: &RuleConfig) -> f64 {
    let delta = r - predictor.value();
    if cfg.normalize_rpe {
        delta / r.abs().max(cfg.rpe_floor)
    } else {
        delta
    }
}

/// Noise impact `ρ = log π̃(a|s) − log π(a|s)`.
pub fn compute_rho(noisy_logp: f64, clean_logp: f64) -> f64 {
    noisy_logp - clean_logp
}
