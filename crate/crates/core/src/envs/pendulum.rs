use std::f64::consts::PI;

use rand::{Rng, RngCore};

use super::{admissible_action, Env, EnvSpec, ResetMode, StepResult};
use crate::error::Result;
use crate::nets::Vector;

const DT: f64 = 0.05;
const GRAVITY: f64 = 10.0;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;
const MAX_SPEED: f64 = 8.0;
const MAX_TORQUE: f64 = 2.0;

/// Torque-limited pendulum swing-up; `theta = 0` is upright.
///
/// Semi-implicit Euler: the clipped new angular velocity advances the angle.
/// Reward is `-(wrap(theta')^2 + 0.1 theta_dot'^2 + 0.001 u^2)` on the
/// post-step state. Observation is `[cos theta, sin theta, theta_dot]`.
#[derive(Debug, Clone)]
pub struct PendulumSwingUp {
    spec: EnvSpec,
    mode: ResetMode,
    state: PendulumState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
    pub steps: usize,
}

/// Maps an angle into `[-pi, pi)`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    (theta + PI).rem_euclid(2.0 * PI) - PI
}

impl PendulumSwingUp {
    pub const NAME: &'static str = "pendulum-swingup";

    pub fn new(mode: ResetMode) -> Self {
        PendulumSwingUp {
            spec: EnvSpec {
                name: Self::NAME.into(),
                obs_dim: 3,
                action_dim: 1,
                action_max: MAX_TORQUE,
                max_episode_steps: 200,
                reward_bound: PI * PI + 0.1 * MAX_SPEED * MAX_SPEED + 0.001 * MAX_TORQUE * MAX_TORQUE,
            },
            mode,
            state: PendulumState {
                theta: PI,
                theta_dot: 0.0,
                steps: 0,
            },
        }
    }

    pub fn state(&self) -> PendulumState {
        self.state
    }
}

impl Env for PendulumSwingUp {
    type Snapshot = PendulumState;

    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vector {
        let (theta, theta_dot) = match self.mode {
            ResetMode::Fixed => (PI, 0.0),
            ResetMode::Random => (rng.random_range(-PI..=PI), rng.random_range(-1.0..=1.0)),
        };
        self.state = PendulumState {
            theta,
            theta_dot,
            steps: 0,
        };
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let u = admissible_action(&self.spec, action)?[0];
        let PendulumState { theta, theta_dot, .. } = self.state;
        let accel = 3.0 * GRAVITY / (2.0 * LENGTH) * theta.sin() + 3.0 / (MASS * LENGTH * LENGTH) * u;
        let theta_dot_next = (theta_dot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
        let theta_next = theta + theta_dot_next * DT;
        self.state.theta = theta_next;
        self.state.theta_dot = theta_dot_next;
        self.state.steps += 1;
        let angle = wrap_angle(theta_next);
        Ok(StepResult {
            obs: self.observe(),
            reward: -(angle * angle + 0.1 * theta_dot_next * theta_dot_next + 0.001 * u * u),
            terminal: false,
            truncated: self.state.steps >= self.spec.max_episode_steps,
        })
    }

    fn observe(&self) -> Vector {
        let PendulumState { theta, theta_dot, .. } = self.state;
        Vector::new(vec![theta.cos(), theta.sin(), theta_dot])
    }

    fn elapsed_steps(&self) -> usize {
        self.state.steps
    }

    fn snapshot(&self) -> PendulumState {
        self.state
    }

    fn restore(&mut self, snapshot: &PendulumState) -> Result<()> {
        self.state = *snapshot;
        Ok(())
    }
}
