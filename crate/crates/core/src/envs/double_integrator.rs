use rand::{Rng, RngCore};

use super::{admissible_action, Env, EnvSpec, ResetMode, StepResult};
use crate::error::Result;
use crate::nets::Vector;

const DT: f64 = 0.05;
const HORIZON: usize = 300;

/// Unit mass on a line driven by a bounded force.
///
/// `x' = x + v dt`, `v' = v + a dt`, reward `-(x'^2 + 0.1 v'^2 + 0.01 a^2)`.
#[derive(Debug, Clone)]
pub struct DoubleIntegrator {
    spec: EnvSpec,
    mode: ResetMode,
    state: DoubleIntegratorState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleIntegratorState {
    pub position: f64,
    pub velocity: f64,
    pub steps: usize,
}

impl DoubleIntegrator {
    pub const NAME: &'static str = "double-integrator";

    pub fn new(mode: ResetMode) -> Self {
        // Over one episode |v| <= HORIZON * dt and |x| <= 1 + HORIZON * dt * |v|max.
        let v_max = HORIZON as f64 * DT;
        let x_max = 1.0 + HORIZON as f64 * DT * v_max;
        DoubleIntegrator {
            spec: EnvSpec {
                name: Self::NAME.into(),
                obs_dim: 2,
                action_dim: 1,
                action_max: 1.0,
                max_episode_steps: HORIZON,
                reward_bound: x_max * x_max + 0.1 * v_max * v_max + 0.01,
            },
            mode,
            state: DoubleIntegratorState {
                position: 1.0,
                velocity: 0.0,
                steps: 0,
            },
        }
    }

    pub fn state(&self) -> DoubleIntegratorState {
        self.state
    }
}

impl Env for DoubleIntegrator {
    type Snapshot = DoubleIntegratorState;

    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vector {
        let position = match self.mode {
            ResetMode::Fixed => 1.0,
            ResetMode::Random => rng.random_range(-1.0..=1.0),
        };
        self.state = DoubleIntegratorState {
            position,
            velocity: 0.0,
            steps: 0,
        };
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let a = admissible_action(&self.spec, action)?[0];
        let DoubleIntegratorState {
            position: x,
            velocity: v,
            ..
        } = self.state;
        let x_next = x + v * DT;
        let v_next = v + a * DT;
        self.state.position = x_next;
        self.state.velocity = v_next;
        self.state.steps += 1;
        Ok(StepResult {
            obs: self.observe(),
            reward: -(x_next * x_next + 0.1 * v_next * v_next + 0.01 * a * a),
            terminal: false,
            truncated: self.state.steps >= self.spec.max_episode_steps,
        })
    }

    fn observe(&self) -> Vector {
        Vector::new(vec![self.state.position, self.state.velocity])
    }

    fn elapsed_steps(&self) -> usize {
        self.state.steps
    }

    fn snapshot(&self) -> DoubleIntegratorState {
        self.state
    }

    fn restore(&mut self, snapshot: &DoubleIntegratorState) -> Result<()> {
        self.state = *snapshot;
        Ok(())
    }
}
