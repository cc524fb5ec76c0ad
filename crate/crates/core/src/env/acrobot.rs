use std::f64::consts::PI;

use super::{check_action, EnvSpec, Environment, RewardMode, StepResult};
use crate::error::{Error, Result};
use crate::numerics::RandomSource;

pub(crate) const DEFAULT_MAX_STEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Torque {
    Negative,
    Zero,
    Positive,
}

impl Torque {
    pub fn value(self) -> f64 {
        match self {
            Torque::Negative => -1.0,
            Torque::Zero => 0.0,
            Torque::Positive => 1.0,
        }
    }
}

impl TryFrom<usize> for Torque {
    type Error = Error;

    fn try_from(a: usize) -> Result<Self> {
        match a {
            0 => Ok(Torque::Negative),
            1 => Ok(Torque::Zero),
            2 => Ok(Torque::Positive),
            _ => Err(Error::InvalidAction { action: a, count: 3 }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcrobotParams {
    pub link_length_1: f64,
    pub link_mass_1: f64,
    pub link_mass_2: f64,
    /// Centre-of-mass offsets along each link.
    pub com_1: f64,
    pub com_2: f64,
    pub moment_of_inertia: f64,
    pub gravity: f64,
    pub dt: f64,
    pub max_vel_1: f64,
    pub max_vel_2: f64,
    pub max_steps: usize,
}

impl Default for AcrobotParams {
    fn default() -> Self {
        Self {
            link_length_1: 1.0,
            link_mass_1: 1.0,
            link_mass_2: 1.0,
            com_1: 0.5,
            com_2: 0.5,
            moment_of_inertia: 1.0,
            gravity: 9.8,
            dt: 0.2,
            max_vel_1: 4.0 * PI,
            max_vel_2: 9.0 * PI,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// Two-link underactuated swing-up with torque on the elbow.
///
/// State is `(θ₁, θ₂, θ̇₁, θ̇₂)` with both links hanging down at zero.
/// One RK4 step of length `dt` per action, angles wrapped to `[−π, π)`,
/// velocities clipped. The goal is the tip rising one link length above the
/// shoulder. The single terminal reward is the fraction of the horizon left
/// on success, and zero on timeout.
#[derive(Debug, Clone)]
pub struct Acrobot {
    params: AcrobotParams,
    state: [f64; 4],
    steps: usize,
    done: bool,
    reached: bool,
}

impl Acrobot {
    pub fn new(params: AcrobotParams) -> Self {
        Self {
            params,
            state: [0.0; 4],
            steps: 0,
            done: true,
            reached: false,
        }
    }

    pub fn params(&self) -> &AcrobotParams {
        &self.params
    }

    pub fn reset_to(&mut self, state: [f64; 4]) -> StepResult {
        self.state = state;
        self.steps = 0;
        self.done = false;
        self.reached = false;
        StepResult::start(self.observation())
    }

    pub fn raw_state(&self) -> [f64; 4] {
        self.state
    }

    fn observation(&self) -> Vec<f64> {
        let [t1, t2, d1, d2] = self.state;
        vec![t1.cos(), t1.sin(), t2.cos(), t2.sin(), d1, d2]
    }

    /// Tip height above the shoulder exceeds one link length.
    pub fn goal_reached(state: &[f64; 4]) -> bool {
        -state[0].cos() - (state[0] + state[1]).cos() > 1.0
    }

    /// Time derivative of the state under elbow torque `torque`.
    pub fn derivatives(&self, s: &[f64; 4], torque: f64) -> [f64; 4] {
        let p = &self.params;
        let (m1, m2, l1) = (p.link_mass_1, p.link_mass_2, p.link_length_1);
        let (lc1, lc2, inertia, g) = (p.com_1, p.com_2, p.moment_of_inertia, p.gravity);
        let [t1, t2, dt1, dt2] = *s;

        let d1 = m1 * lc1 * lc1
            + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * t2.cos())
            + 2.0 * inertia;
        let d2 = m2 * (lc2 * lc2 + l1 * lc2 * t2.cos()) + inertia;
        // cos(θ − π/2) written as sin θ keeps the hanging rest state exact.
        let phi2 = m2 * lc2 * g * (t1 + t2).sin();
        let phi1 = -m2 * l1 * lc2 * dt2 * dt2 * t2.sin()
            - 2.0 * m2 * l1 * lc2 * dt2 * dt1 * t2.sin()
            + (m1 * lc1 + m2 * l1) * g * t1.sin()
            + phi2;
        let ddt2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1 * dt1 * t2.sin() - phi2)
            / (m2 * lc2 * lc2 + inertia - d2 * d2 / d1);
        let ddt1 = -(d2 * ddt2 + phi1) / d1;
        [dt1, dt2, ddt1, ddt2]
    }

    fn rk4(&self, s: &[f64; 4], torque: f64) -> [f64; 4] {
        let h = self.params.dt;
        let add = |a: &[f64; 4], k: &[f64; 4], scale: f64| -> [f64; 4] {
            std::array::from_fn(|i| a[i] + scale * k[i])
        };
        let k1 = self.derivatives(s, torque);
        let k2 = self.derivatives(&add(s, &k1, h / 2.0), torque);
        let k3 = self.derivatives(&add(s, &k2, h / 2.0), torque);
        let k4 = self.derivatives(&add(s, &k3, h), torque);
        std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    }
}

/// Wraps an angle into `[−π, π)`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x;
    while y >= PI {
        y -= two_pi;
    }
    while y < -PI {
        y += two_pi;
    }
    y
}

impl Environment for Acrobot {
    fn spec(&self) -> EnvSpec {
        EnvSpec {
            obs_dim: 6,
            action_count: 3,
            max_steps: self.params.max_steps,
            reward_mode: RewardMode::Terminal,
        }
    }

    fn reset(&mut self, rng: &mut RandomSource) -> StepResult {
        let mut s = [0.0; 4];
        s.iter_mut().for_each(|x| *x = rng.uniform_in(-0.1, 0.1));
        self.reset_to(s)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        check_action(action, 3)?;
        let torque = Torque::try_from(action)?.value();
        let next = self.rk4(&self.state, torque);
        let p = &self.params;
        self.state = [
            wrap_angle(next[0]),
            wrap_angle(next[1]),
            next[2].clamp(-p.max_vel_1, p.max_vel_1),
            next[3].clamp(-p.max_vel_2, p.max_vel_2),
        ];
        self.steps += 1;
        self.reached = Self::goal_reached(&self.state);
        self.done = self.reached || self.steps >= p.max_steps;
        let reward = if self.reached {
            (p.max_steps - self.steps) as f64 / p.max_steps as f64
        } else {
            0.0
        };
        Ok(StepResult {
            observation: self.observation(),
            reward,
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
        self.reached
    }
}
