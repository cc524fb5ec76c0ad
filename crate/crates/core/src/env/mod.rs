//! Episodic benchmark environments.
//!
//! Reaching rewards every step; Cartpole and Acrobot deliver a single
//! reward when the episode ends, which is the only point a weight update
//! fires for them.

mod acrobot;
mod cartpole;
mod reaching;
mod trajectory;

pub use acrobot::{Acrobot, AcrobotParams, Torque};
pub use cartpole::{CartAction, Cartpole, CartpoleParams};
pub use reaching::{ReachAction, Reaching};
pub use trajectory::{read_trajectory, write_trajectory, TrajectoryRecord};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Reaching,
    Cartpole,
    Acrobot,
}

impl EnvKind {
    pub const ALL: [EnvKind; 3] = [EnvKind::Reaching, EnvKind::Cartpole, EnvKind::Acrobot];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Reaching => "reaching",
            EnvKind::Cartpole => "cartpole",
            EnvKind::Acrobot => "acrobot",
        }
    }

    /// Builds the environment; `max_steps` overrides the default horizon.
    pub fn build(self, max_steps: Option<usize>) -> Box<dyn Environment + Send> {
        match self {
            EnvKind::Reaching => Box::new(Reaching::new(
                reaching::RING_SIZE,
                max_steps.unwrap_or(reaching::DEFAULT_MAX_STEPS),
            )),
            EnvKind::Cartpole => Box::new(Cartpole::new(CartpoleParams {
                max_steps: max_steps.unwrap_or(cartpole::DEFAULT_MAX_STEPS),
                ..CartpoleParams::default()
            })),
            EnvKind::Acrobot => Box::new(Acrobot::new(AcrobotParams {
                max_steps: max_steps.unwrap_or(acrobot::DEFAULT_MAX_STEPS),
                ..AcrobotParams::default()
            })),
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reaching" => Ok(EnvKind::Reaching),
            "cartpole" => Ok(EnvKind::Cartpole),
            "acrobot" => Ok(EnvKind::Acrobot),
            other => Err(Error::Config(format!("unknown environment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardMode {
    /// A reward event on every step.
    PerStep,
    /// One reward event, when the episode ends.
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvSpec {
    pub obs_dim: usize,
    pub action_count: usize,
    pub max_steps: usize,
    pub reward_mode: RewardMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// A reward was delivered and the learning rule should update.
    pub reward_event: bool,
}

impl StepResult {
    fn start(observation: Vec<f64>) -> Self {
        Self {
            observation,
            reward: 0.0,
            done: false,
            reward_event: false,
        }
    }
}

pub trait Environment {
    fn spec(&self) -> EnvSpec;

    /// Starts a new episode.
    fn reset(&mut self, rng: &mut RandomSource) -> StepResult;

    /// Advances one step. Fails on an out-of-range action or after the
    /// episode has finished.
    fn step(&mut self, action: usize) -> Result<StepResult>;

    /// Raw simulator state, for trajectory dumps.
    fn state(&self) -> Vec<f64>;

    /// Steps taken in the current episode.
    fn steps(&self) -> usize;

    /// Whether the last episode ended by reaching its goal rather than by
    /// timing out (or, for Cartpole, by falling).
    fn succeeded(&self) -> bool;
}

pub(crate) fn check_action(action: usize, count: usize) -> Result<()> {
    if action >= count {
        Err(Error::InvalidAction { action, count })
    } else {
        Ok(())
    }
}
