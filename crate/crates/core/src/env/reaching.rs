use super::{check_action, EnvSpec, Environment, RewardMode, StepResult};
use crate::error::{Error, Result};
use crate::numerics::RandomSource;

pub(crate) const RING_SIZE: usize = 16;
pub(crate) const DEFAULT_MAX_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachAction {
    Left,
    Stay,
    Right,
}

impl ReachAction {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl TryFrom<usize> for ReachAction {
    type Error = Error;

    fn try_from(a: usize) -> Result<Self> {
        match a {
            0 => Ok(ReachAction::Left),
            1 => Ok(ReachAction::Stay),
            2 => Ok(ReachAction::Right),
            _ => Err(Error::InvalidAction { action: a, count: 3 }),
        }
    }
}

/// Reach and hold a target on a discrete 1-D ring.
///
/// The observation concatenates one-hot codes of the agent position and the
/// target position. Each episode draws a target uniformly and starts the
/// agent diametrically opposite it. Every step pays `1 − d / (ring/2)`,
/// `d` being the circular distance after the move.
#[derive(Debug, Clone)]
pub struct Reaching {
    ring: usize,
    max_steps: usize,
    agent: usize,
    target: usize,
    steps: usize,
    done: bool,
}

impl Reaching {
    pub fn new(ring: usize, max_steps: usize) -> Self {
        assert!(ring >= 2 && ring.is_multiple_of(2), "ring size must be even");
        Self {
            ring,
            max_steps,
            agent: 0,
            target: ring / 2,
            steps: 0,
            done: true,
        }
    }

    /// Places agent and target explicitly and starts a fresh episode.
    pub fn reset_to(&mut self, agent: usize, target: usize) -> StepResult {
        self.agent = agent % self.ring;
        self.target = target % self.ring;
        self.steps = 0;
        self.done = false;
        StepResult::start(self.observation())
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn distance(&self) -> usize {
        let d = (self.agent + self.ring - self.target) % self.ring;
        d.min(self.ring - d)
    }

    pub fn reward(&self) -> f64 {
        1.0 - self.distance() as f64 / (self.ring / 2) as f64
    }

    fn observation(&self) -> Vec<f64> {
        let mut obs = vec![0.0; 2 * self.ring];
        obs[self.agent] = 1.0;
        obs[self.ring + self.target] = 1.0;
        obs
    }
}

impl Environment for Reaching {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            obs_dim: 2 * self.ring,
            action_count: 3,
            max_steps: self.max_steps,
            reward_mode: RewardMode::PerStep,
        }
    }

    fn reset(&mut self, rng: &mut RandomSource) -> StepResult {
        let target = rng.below(self.ring);
        self.reset_to(target + self.ring / 2, target)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        check_action(action, 3)?;
        self.agent = match ReachAction::try_from(action)? {
            ReachAction::Left => (self.agent + self.ring - 1) % self.ring,
            ReachAction::Stay => self.agent,
            ReachAction::Right => (self.agent + 1) % self.ring,
        };
        self.steps += 1;
        self.done = self.steps >= self.max_steps;
        Ok(StepResult {
            observation: self.observation(),
            reward: self.reward(),
            done: self.done,
            reward_event: true,
        })
    }

    fn state(&self) -> Vec<f64> {
        vec![self.agent as f64, self.target as f64]
    }

    fn steps(&self) -> usize {
        self.steps
    }

    fn succeeded(&self) -> bool {
        self.distance() == 0
    }
}
