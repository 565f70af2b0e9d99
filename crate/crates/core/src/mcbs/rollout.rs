use rand::Rng;

use super::{BudgetLedger, Candidate, PlanningModel};
use crate::envs::Env;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::nets::Vector;
use crate::rng::{gaussian, indexed};

/// Return of one short-horizon rollout plus the work it cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutOutcome {
    pub value: f64,
    pub env_steps: usize,
    pub actor_forwards: usize,
    pub critic_forwards: usize,
}

fn noisy_policy<M: PlanningModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    state: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<Vector> {
    let bound = model.action_max();
    Ok(model
        .policy(state)?
        .iter()
        .map(|&a| (a + gaussian(rng, sigma)).clamp(-bound, bound))
        .collect())
}

/// Simulates `depth` steps from `snapshot` on a private copy of `env`.
///
/// Rewards are discounted from the first step; the first action is
/// `first_action`, later ones are `clip(pi(s') + eta)`. An episode end
/// returns the accumulated reward; otherwise the tail is bootstrapped with
/// `gamma^depth * min(Q1, Q2)` at the final state and a freshly sampled
/// action. With `depth == 0` the result is `min(Q1, Q2)(s, first_action)`.
#[allow(clippy::too_many_arguments)]
pub fn short_horizon<E, M, R>(
    env: &E,
    snapshot: &E::Snapshot,
    first_action: &[f64],
    depth: usize,
    gamma: f64,
    noise_sigma: f64,
    model: &M,
    rng: &mut R,
) -> Result<RolloutOutcome>
where
    E: Env,
    M: PlanningModel + ?Sized,
    R: Rng + ?Sized,
{
    let mut sim = env.clone();
    sim.restore(snapshot)?;
    let mut state = sim.observe();
    let mut action = Vector::from(first_action);
    let mut ret = 0.0;
    let mut discount = 1.0;
    let mut outcome = RolloutOutcome {
        value: 0.0,
        env_steps: 0,
        actor_forwards: 0,
        critic_forwards: 0,
    };

    for _ in 0..depth {
        let step = sim.step(&action)?;
        outcome.env_steps += 1;
        ret += discount * step.reward;
        discount *= gamma;
        if step.done() {
            outcome.value = ret;
            return Ok(outcome);
        }
        action = noisy_policy(model, &step.obs, noise_sigma, rng)?;
        outcome.actor_forwards += 1;
        state = step.obs;
    }

    let tail = model.bootstrap(&state, &action)?;
    outcome.critic_forwards += 2;
    outcome.value = ret + discount * tail;
    if !outcome.value.is_finite() {
        return Err(Error::non_finite(format!(
            "rollout return (partial {ret}, bootstrap {tail}, discount {discount})"
        )));
    }
    Ok(outcome)
}

/// Scores every candidate by the mean of `num_sims` rollouts.
///
/// Rollout `(i, j)` draws from its own stream `indexed(rollout_seed, i * num_sims + j)`
/// and returns are summed in `j` order, so the result does not depend on
/// `execution`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_candidates<E, M>(
    env: &E,
    snapshot: &E::Snapshot,
    candidates: &[Vector],
    depth: usize,
    num_sims: usize,
    gamma: f64,
    noise_sigma: f64,
    model: &M,
    rollout_seed: u64,
    execution: Execution,
    ledger: &mut BudgetLedger,
) -> Result<Vec<Candidate>>
where
    E: Env,
    M: PlanningModel + ?Sized,
{
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidates to evaluate".into()));
    }
    if num_sims == 0 {
        return Err(Error::InvalidArgument("num_sims must be at least 1".into()));
    }
    let total = candidates.len() * num_sims;
    let outcomes = map_indexed(total, execution, |k| {
        let mut rng = indexed(rollout_seed, k as u64);
        short_horizon(
            env,
            snapshot,
            &candidates[k / num_sims],
            depth,
            gamma,
            noise_sigma,
            model,
            &mut rng,
        )
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let before = ledger.rollout_env_steps;
    for o in &outcomes {
        ledger.charge(o);
    }
    let call = ledger.rollout_env_steps - before;
    ledger.max_rollout_steps_per_call = ledger.max_rollout_steps_per_call.max(call);
    Ok(candidates
        .iter()
        .zip(outcomes.chunks(num_sims))
        .map(|(a, runs)| Candidate::from_returns(a.clone(), runs.iter().map(|o| o.value).collect()))
        .collect())
}
