use rand::{Rng, RngCore};

use super::{evaluate_candidates, saturation_schedule, BudgetLedger, Candidate, McbsConfig, PlanningModel};
use crate::envs::Env;
use crate::error::{Error, Result};
use crate::nets::Vector;
use crate::rng::{gaussian, substream, Stream, StreamRng};
use crate::td3::{Td3Agent, Td3Config};

/// `B` candidates `clip(pi(s) + eta_i, ±A_max)`, `eta_i ~ N(0, sigma^2)`.
///
/// The noise itself is not clipped; only the resulting action is.
pub fn generate_beam<M, R>(model: &M, state: &[f64], beam_width: usize, sigma: f64, rng: &mut R) -> Result<Vec<Vector>>
where
    M: PlanningModel + ?Sized,
    R: Rng + ?Sized,
{
    if beam_width == 0 {
        return Err(Error::InvalidArgument("beam width must be at least 1".into()));
    }
    let bound = model.action_max();
    let center = model.policy(state)?;
    Ok((0..beam_width)
        .map(|_| {
            center
                .iter()
                .map(|&a| (a + gaussian(rng, sigma)).clamp(-bound, bound))
                .collect()
        })
        .collect())
}

/// Index of the highest score; ties go to the lowest index.
pub fn select_action(candidates: &[Candidate]) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("cannot select from an empty beam".into()));
    }
    if let Some(i) = candidates.iter().position(|c| !c.score.is_finite()) {
        return Err(Error::non_finite(format!("candidate {i} score")));
    }
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        if c.score > candidates[best].score {
            best = i;
        }
    }
    Ok(best)
}

/// Random streams owned by the planner.
#[derive(Debug, Clone)]
pub struct PlannerRngs {
    pub beam: StreamRng,
    pub rollout: StreamRng,
}

impl PlannerRngs {
    pub fn from_seed(seed: u64) -> Self {
        PlannerRngs {
            beam: substream(seed, Stream::Beam),
            rollout: substream(seed, Stream::Rollout),
        }
    }
}

/// Training progress visible to the adaptive schedule.
#[derive(Debug, Clone, Copy)]
pub struct Progress<'a> {
    pub real_step: u64,
    pub eval_history: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub action: Vector,
    pub beam_on: bool,
    /// Scored beam when it ran.
    pub candidates: Vec<Candidate>,
    pub chosen: Option<usize>,
}

/// Picks the action to execute from the live environment's current state.
///
/// Beam on: snapshot, generate, evaluate, argmax. Beam off: the agent's
/// ordinary noisy action drawn from `exploration`. `env` is only read.
#[allow(clippy::too_many_arguments)]
pub fn plan_action<E: Env>(
    agent: &Td3Agent,
    env: &E,
    cfg: &McbsConfig,
    td3: &Td3Config,
    ledger: &mut BudgetLedger,
    rngs: &mut PlannerRngs,
    exploration: &mut dyn RngCore,
    progress: Progress<'_>,
) -> Result<PlanOutcome> {
    let state = env.observe();
    ledger.planning_calls += 1;
    if !saturation_schedule(progress.eval_history, cfg, progress.real_step) {
        ledger.actor_forwards += 1;
        return Ok(PlanOutcome {
            action: agent.explore_action(&state, td3, exploration)?,
            beam_on: false,
            candidates: Vec::new(),
            chosen: None,
        });
    }

    ledger.beam_on_calls += 1;
    let snapshot = env.snapshot();
    let beam = generate_beam(agent, &state, cfg.beam_width, cfg.beam_noise_sigma, &mut rngs.beam)?;
    ledger.actor_forwards += 1;
    let rollout_seed = rngs.rollout.next_u64();
    let candidates = evaluate_candidates(
        env,
        &snapshot,
        &beam,
        cfg.rollout_depth,
        cfg.num_sims,
        td3.gamma,
        cfg.beam_noise_sigma,
        agent,
        rollout_seed,
        cfg.execution,
        ledger,
    )?;
    let best = select_action(&candidates)?;
    let mut action = candidates[best].action.clone();
    if cfg.selection_noise_sigma > 0.0 {
        let bound = agent.action_max();
        for a in action.iter_mut() {
            *a = (*a + gaussian(&mut rngs.beam, cfg.selection_noise_sigma)).clamp(-bound, bound);
        }
    }
    Ok(PlanOutcome {
        action,
        beam_on: true,
        candidates,
        chosen: Some(best),
    })
}
