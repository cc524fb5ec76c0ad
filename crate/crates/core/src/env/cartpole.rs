use super::{check_action, EnvSpec, Environment, RewardMode, StepResult};
use crate::error::{Error, Result};
use crate::numerics::RandomSource;

pub(crate) const DEFAULT_MAX_STEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartAction {
    PushLeft,
    PushRight,
}

impl TryFrom<usize> for CartAction {
    type Error = Error;

    fn try_from(a: usize) -> Result<Self> {
        match a {
            0 => Ok(CartAction::PushLeft),
            1 => Ok(CartAction::PushRight),
            _ => Err(Error::InvalidAction { action: a, count: 2 }),
        }
    }
}

/// Classic cart-pole constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartpoleParams {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half the pole length.
    pub half_length: f64,
    pub force: f64,
    pub tau: f64,
    pub x_limit: f64,
    /// Radians.
    pub theta_limit: f64,
    pub max_steps: usize,
}

impl Default for CartpoleParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            force: 10.0,
            tau: 0.02,
            x_limit: 2.4,
            theta_limit: 12.0 * std::f64::consts::PI / 180.0,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// Cart-pole balancing with a single reward, the number of steps survived,
/// paid when the episode ends.
///
/// State is `(x, ẋ, θ, θ̇)`; integration is semi-implicit Euler (velocities
/// first, positions from the new velocities).
#[derive(Debug, Clone)]
pub struct Cartpole {
    params: CartpoleParams,
    state: [f64; 4],
    steps: usize,
    done: bool,
    fell: bool,
}

impl Cartpole {
    pub fn new(params: CartpoleParams) -> Self {
        Self {
            params,
            state: [0.0; 4],
            steps: 0,
            done: true,
            fell: false,
        }
    }

    pub fn params(&self) -> &CartpoleParams {
        &self.params
    }

    /// Starts an episode from an explicit state.
    pub fn reset_to(&mut self, state: [f64; 4]) -> StepResult {
        self.state = state;
        self.steps = 0;
        self.done = false;
        self.fell = false;
        StepResult::start(state.to_vec())
    }

    pub fn raw_state(&self) -> [f64; 4] {
        self.state
    }

    /// Accelerations `(ẍ, θ̈)` under the given horizontal force.
    pub fn accelerations(&self, state: &[f64; 4], force: f64) -> (f64, f64) {
        let p = &self.params;
        let [_, _, theta, theta_dot] = *state;
        let total_mass = p.cart_mass + p.pole_mass;
        let pole_moment = p.pole_mass * p.half_length;
        let (sin, cos) = theta.sin_cos();
        let temp = (force + pole_moment * theta_dot * theta_dot * sin) / total_mass;
        let theta_acc = (p.gravity * sin - cos * temp)
            / (p.half_length * (4.0 / 3.0 - p.pole_mass * cos * cos / total_mass));
        let x_acc = temp - pole_moment * theta_acc * cos / total_mass;
        (x_acc, theta_acc)
    }

    /// Out-of-bounds test applied after every step.
    pub fn out_of_bounds(&self, state: &[f64; 4]) -> bool {
        state[0].abs() > self.params.x_limit || state[2].abs() >= self.params.theta_limit
    }
}

impl Environment for Cartpole {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            obs_dim: 4,
            action_count: 2,
            max_steps: self.params.max_steps,
            reward_mode: RewardMode::Terminal,
        }
    }

    fn reset(&mut self, rng: &mut RandomSource) -> StepResult {
        let mut s = [0.0; 4];
        s.iter_mut().for_each(|x| *x = rng.uniform_in(-0.05, 0.05));
        self.reset_to(s)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        check_action(action, 2)?;
        let force = match CartAction::try_from(action)? {
            CartAction::PushLeft => -self.params.force,
            CartAction::PushRight => self.params.force,
        };
        let (x_acc, theta_acc) = self.accelerations(&self.state, force);
        let tau = self.params.tau;
        let [x, x_dot, theta, theta_dot] = self.state;
        let x_dot = x_dot + tau * x_acc;
        let theta_dot = theta_dot + tau * theta_acc;
        self.state = [x + tau * x_dot, x_dot, theta + tau * theta_dot, theta_dot];
        self.steps += 1;
        self.fell = self.out_of_bounds(&self.state);
        self.done = self.fell || self.steps >= self.params.max_steps;
        Ok(StepResult {
            observation: self.state.to_vec(),
            reward: if self.done { self.steps as f64 } else { 0.0 },
            done: self.done,
            reward_event: self.done,
        })
    }

    fn state(&self) -> Vec<f64> {
        self.state.to_vec()
    }

    fn steps(&self) -> usize {
        self.steps
    }

    fn succeeded(&self) -> bool {
        self.done && !self.fell
    }
}
