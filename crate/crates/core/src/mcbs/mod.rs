//! Monte Carlo beam search over continuous actions.
//!
//! Per decision: perturb the policy action into `B` candidates, score each
//! by averaging `N_sim` short rollouts on a restored copy of the live
//! simulator (each bootstrapped with the twin-critic minimum after `D`
//! steps), and execute the best-scoring candidate.

mod beam;
mod rollout;
mod schedule;

pub use beam::{generate_beam, plan_action, select_action, PlanOutcome, PlannerRngs, Progress};
pub use rollout::{evaluate_candidates, short_horizon, RolloutOutcome};
pub use schedule::saturation_schedule;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::nets::Vector;
use crate::td3::Td3Agent;

#[derive(Debug, Clone, PartialEq)]
pub struct McbsConfig {
    pub beam_width: usize,
    pub rollout_depth: usize,
    pub num_sims: usize,
    /// Std of candidate and rollout noise, in action units.
    pub beam_noise_sigma: f64,
    pub adaptive: bool,
    pub saturation_window: usize,
    pub saturation_epsilon: f64,
    pub min_beam_interval: usize,
    /// Extra Gaussian noise on the selected action; 0 executes it as chosen.
    pub selection_noise_sigma: f64,
    pub execution: Execution,
}

impl Default for McbsConfig {
    fn default() -> Self {
        Self::for_action_max(1.0)
    }
}

impl McbsConfig {
    pub fn for_action_max(action_max: f64) -> Self {
        McbsConfig {
            beam_width: 6,
            rollout_depth: 3,
            num_sims: 5,
            beam_noise_sigma: 0.2 * action_max,
            adaptive: true,
            saturation_window: 10,
            saturation_epsilon: 0.01,
            min_beam_interval: 10,
            selection_noise_sigma: 0.0,
            execution: Execution::Parallel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 || self.num_sims == 0 {
            return Err(Error::Config("beam_width and num_sims must be at least 1".into()));
        }
        if self.saturation_window == 0 || self.min_beam_interval == 0 {
            return Err(Error::Config(
                "saturation_window and min_beam_interval must be at least 1".into(),
            ));
        }
        for (name, v) in [
            ("beam_noise_sigma", self.beam_noise_sigma),
            ("saturation_epsilon", self.saturation_epsilon),
            ("selection_noise_sigma", self.selection_noise_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Upper bound on simulated steps charged by one beam-on planning call.
    pub fn rollout_budget(&self) -> usize {
        self.beam_width * self.num_sims * self.rollout_depth
    }
}

/// A beam member and its rollout returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub action: Vector,
    pub returns: Vec<f64>,
    /// Arithmetic mean of `returns`.
    pub score: f64,
}

impl Candidate {
    pub fn from_returns(action: Vector, returns: Vec<f64>) -> Self {
        let score = returns.iter().sum::<f64>() / returns.len() as f64;
        Candidate {
            action,
            returns,
            score,
        }
    }
}

/// Cumulative compute accounting. Counters only grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BudgetLedger {
    pub real_env_steps: u64,
    pub rollout_env_steps: u64,
    pub actor_forwards: u64,
    pub critic_forwards: u64,
    pub planning_calls: u64,
    pub beam_on_calls: u64,
    /// Largest rollout charge of a single candidate evaluation.
    pub max_rollout_steps_per_call: u64,
}

impl BudgetLedger {
    pub fn charge(&mut self, outcome: &RolloutOutcome) {
        self.rollout_env_steps += outcome.env_steps as u64;
        self.actor_forwards += outcome.actor_forwards as u64;
        self.critic_forwards += outcome.critic_forwards as u64;
    }

    /// Fraction of planning calls that ran the beam.
    pub fn beam_on_fraction(&self) -> f64 {
        if self.planning_calls == 0 {
            0.0
        } else {
            self.beam_on_calls as f64 / self.planning_calls as f64
        }
    }
}

/// What the planner needs from the learner: a policy and a bootstrap value.
pub trait PlanningModel: Sync {
    fn action_max(&self) -> f64;

    /// Deterministic policy action, already within `±action_max`.
    fn policy(&self, state: &[f64]) -> Result<Vector>;

    /// Pessimistic value `min(Q1, Q2)` of `(state, action)`.
    fn bootstrap(&self, state: &[f64], action: &[f64]) -> Result<f64>;
}

impl PlanningModel for Td3Agent {
    fn action_max(&self) -> f64 {
        Td3Agent::action_max(self)
    }

    fn policy(&self, state: &[f64]) -> Result<Vector> {
        self.act(state)
    }

    fn bootstrap(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        self.min_q(state, action)
    }
}
