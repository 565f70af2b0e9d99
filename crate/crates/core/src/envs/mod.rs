//! Deterministic control environments with exact snapshot/restore.
//!
//! Each environment clamps incoming actions to `±action_max`, reports a
//! genuine `terminal` flag separately from time-limit `truncated`, and
//! documents a finite per-step reward bound in its [`EnvSpec`].

mod builtin;
mod double_integrator;
mod linear_track;
mod pendulum;

use std::fmt::Debug;

use rand::RngCore;

pub use builtin::{make_env, BuiltinEnv, BuiltinSnapshot, ENV_NAMES};
pub use double_integrator::{DoubleIntegrator, DoubleIntegratorState};
pub use linear_track::{LinearTrack, LinearTrackState};
pub use pendulum::{PendulumState, PendulumSwingUp};

use crate::error::{Error, Result};
use crate::nets::Vector;

/// Static description of an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub obs_dim: usize,
    pub action_dim: usize,
    /// Symmetric per-dimension action bound.
    pub action_max: f64,
    pub max_episode_steps: usize,
    /// Every reward within an episode satisfies `|r| <= reward_bound`.
    pub reward_bound: f64,
}

impl EnvSpec {
    /// `key=value` lines, one field per line.
    pub fn describe(&self) -> String {
        format!(
            "name={}\nobs_dim={}\naction_dim={}\naction_max={}\nmax_episode_steps={}\nreward_bound={}\n",
            self.name, self.obs_dim, self.action_dim, self.action_max, self.max_episode_steps, self.reward_bound
        )
    }
}

/// Outcome of one control step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Vector,
    pub reward: f64,
    /// A genuine terminal state: no bootstrapping past it.
    pub terminal: bool,
    /// The step limit was reached.
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// How [`Env::reset`] picks the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResetMode {
    /// Fixed initial condition, used by tests.
    Fixed,
    /// Initial condition drawn from the reset stream.
    #[default]
    Random,
}

pub trait Env: Clone + Send + Sync {
    type Snapshot: Clone + Debug + Send + Sync;

    fn spec(&self) -> &EnvSpec;

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vector;

    fn step(&mut self, action: &[f64]) -> Result<StepResult>;

    /// Current observation without advancing.
    fn observe(&self) -> Vector;

    /// Steps taken since the last reset.
    fn elapsed_steps(&self) -> usize;

    fn snapshot(&self) -> Self::Snapshot;

    fn restore(&mut self, snapshot: &Self::Snapshot) -> Result<()>;
}

/// Validates length and finiteness, then clamps into the action box.
pub(crate) fn admissible_action(spec: &EnvSpec, action: &[f64]) -> Result<Vec<f64>> {
    if action.len() != spec.action_dim {
        return Err(Error::shape("env action", spec.action_dim, action.len()));
    }
    if action.iter().any(|a| !a.is_finite()) {
        return Err(Error::non_finite(format!("action passed to {}", spec.name)));
    }
    Ok(action
        .iter()
        .map(|a| a.clamp(-spec.action_max, spec.action_max))
        .collect())
}
