use rand::{Rng, RngCore};

use super::{admissible_action, Env, EnvSpec, ResetMode, StepResult};
use crate::error::Result;
use crate::nets::Vector;

const STEP_GAIN: f64 = 0.1;
const POSITION_LIMIT: f64 = 5.0;

/// One-dimensional point: `s' = clip(s + 0.1 a, -5, 5)`, reward `-s'^2`.
///
/// Never terminates; truncates after 200 steps.
#[derive(Debug, Clone)]
pub struct LinearTrack {
    spec: EnvSpec,
    mode: ResetMode,
    state: LinearTrackState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTrackState {
    pub position: f64,
    pub steps: usize,
}

impl LinearTrack {
    pub const NAME: &'static str = "linear-track";

    pub fn new(mode: ResetMode) -> Self {
        LinearTrack {
            spec: EnvSpec {
                name: Self::NAME.into(),
                obs_dim: 1,
                action_dim: 1,
                action_max: 1.0,
                max_episode_steps: 200,
                reward_bound: POSITION_LIMIT * POSITION_LIMIT,
            },
            mode,
            state: LinearTrackState {
                position: 1.0,
                steps: 0,
            },
        }
    }

    pub fn state(&self) -> LinearTrackState {
        self.state
    }
}

impl Env for LinearTrack {
    type Snapshot = LinearTrackState;

    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vector {
        let position = match self.mode {
            ResetMode::Fixed => 1.0,
            ResetMode::Random => rng.random_range(-2.0..=2.0),
        };
        self.state = LinearTrackState { position, steps: 0 };
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let a = admissible_action(&self.spec, action)?[0];
        let s = (self.state.position + STEP_GAIN * a).clamp(-POSITION_LIMIT, POSITION_LIMIT);
        self.state.position = s;
        self.state.steps += 1;
        Ok(StepResult {
            obs: self.observe(),
            reward: -s * s,
            terminal: false,
            truncated: self.state.steps >= self.spec.max_episode_steps,
        })
    }

    fn observe(&self) -> Vector {
        Vector::new(vec![self.state.position])
    }

    fn elapsed_steps(&self) -> usize {
        self.state.steps
    }

    fn snapshot(&self) -> LinearTrackState {
        self.state
    }

    fn restore(&mut self, snapshot: &LinearTrackState) -> Result<()> {
        self.state = *snapshot;
        Ok(())
    }
}
