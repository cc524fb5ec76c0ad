//! Weight-update rules: noise-based (NRL), reward-modulated Hebbian (RMHL),
//! and the exact policy gradient, all sharing one eligibility-trace shape.
//!
//! Every rule accumulates a per-layer trace between reward events and, when
//! a reward arrives, applies `W^l += η · δ · trace^l` and clears the trace.

mod predictor;
mod trace;

pub use predictor::{compute_rho, rpe, RewardPredictor, RuleConfig};
pub use trace::{EligibilityTrace, StepContext};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::policy::PolicyNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    /// Noise-based reward-modulated learning.
    Nrl,
    /// Reward-modulated Hebbian learning with explicit noise.
    Rmhl,
    /// Exact `∇ log π` summed over the trajectory (the backprop baseline).
    Exact,
}

impl RuleKind {
    pub const ALL: [RuleKind; 3] = [RuleKind::Nrl, RuleKind::Rmhl, RuleKind::Exact];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Nrl => "nrl",
            RuleKind::Rmhl => "rmhl",
            RuleKind::Exact => "exact",
        }
    }

    /// Whether the rule perturbs the network with noise.
    pub fn uses_noise(self) -> bool {
        !matches!(self, RuleKind::Exact)
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nrl" => Ok(RuleKind::Nrl),
            "rmhl" => Ok(RuleKind::Rmhl),
            "exact" | "bp" | "bptt" => Ok(RuleKind::Exact),
            other => Err(Error::Config(format!("unknown rule `{other}`"))),
        }
    }
}

/// One rule instance for one training run: owns the trace and the reward
/// predictor.
#[derive(Debug, Clone)]
pub struct Learner {
    kind: RuleKind,
    cfg: RuleConfig,
    trace: EligibilityTrace,
    predictor: RewardPredictor,
    updates: usize,
}

impl Learner {
    pub fn new(
        kind: RuleKind,
        cfg: RuleConfig,
        predictor: RewardPredictor,
        net: &PolicyNetwork,
    ) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            kind,
            cfg,
            trace: EligibilityTrace::for_network(net),
            predictor,
            updates: 0,
        })
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn config(&self) -> &RuleConfig {
        &self.cfg
    }

    pub fn predictor(&self) -> &RewardPredictor {
        &self.predictor
    }

    pub fn trace(&self) -> &EligibilityTrace {
        &self.trace
    }

    /// Number of reward events applied so far.
    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Folds one noisy step into the trace (NRL or RMHL).
    pub fn accumulate_step(&mut self, ctx: &StepContext) -> Result<()> {
        match self.kind {
            RuleKind::Nrl => self.trace.nrl_accumulate(ctx),
            RuleKind::Rmhl => self.trace.rmhl_accumulate(ctx),
            RuleKind::Exact => Err(Error::Config(
                "exact-gradient rule accumulates gradients, not noise".into(),
            )),
        }
    }

    /// Folds one step's `∇ log π` into the trace (exact rule).
    pub fn accumulate_gradient(&mut self, grads: &[Matrix]) -> Result<()> {
        match self.kind {
            RuleKind::Exact => self.trace.exact_gradient_accumulate(grads),
            _ => Err(Error::Config(format!(
                "{} accumulates noise, not gradients",
                self.kind
            ))),
        }
    }

    /// Reward event: computes `δ` against the current prediction, applies
    /// `η δ trace`, clears the trace, then moves the prediction toward `r`.
    /// Returns `δ`.
    pub fn reward(&mut self, net: &mut PolicyNetwork, r: f64) -> Result<f64> {
        if !r.is_finite() {
            return Err(Error::NonFinite("reward"));
        }
        let delta = rpe(&self.predictor, r, &self.cfg);
        self.trace.apply(net, delta, self.cfg.eta)?;
        self.predictor.update(r);
        self.updates += 1;
        Ok(delta)
    }
}
