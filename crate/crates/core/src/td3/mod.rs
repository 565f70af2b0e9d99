//! Twin-critic deterministic actor-critic learner.
//!
//! Critics regress to the clipped double-Q target computed with smoothed
//! target actions; the actor and all three target networks are refreshed
//! once every `policy_delay` critic steps.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::nets::checkpoint::{load_adam, load_mlp, save_adam, save_mlp, FORMAT_VERSION};
use crate::nets::{polyak_update, Activation, Adam, Mlp, Vector};
use crate::replay::Transition;
use crate::rng::gaussian;

#[derive(Debug, Clone, PartialEq)]
pub struct Td3Config {
    pub gamma: f64,
    pub tau: f64,
    pub policy_delay: usize,
    /// Std of the target smoothing noise, in action units.
    pub target_noise_sigma: f64,
    /// Target smoothing noise is clipped to `±target_noise_clip`.
    pub target_noise_clip: f64,
    /// Std of the behaviour noise, in action units.
    pub exploration_sigma: f64,
    pub batch_size: usize,
    pub warmup_steps: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden_sizes: Vec<usize>,
    pub replay_capacity: usize,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self::for_action_max(1.0)
    }
}

impl Td3Config {
    /// Reference defaults with noise scales proportional to `action_max`.
    pub fn for_action_max(action_max: f64) -> Self {
        Td3Config {
            gamma: 0.99,
            tau: 0.005,
            policy_delay: 2,
            target_noise_sigma: 0.2 * action_max,
            target_noise_clip: 0.5 * action_max,
            exploration_sigma: 0.1 * action_max,
            batch_size: 256,
            warmup_steps: 1000,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            hidden_sizes: vec![256, 256],
            replay_capacity: 200_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.policy_delay == 0 {
            return fail("policy_delay must be at least 1".into());
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return fail("batch_size and replay_capacity must be positive".into());
        }
        for (name, v) in [
            ("target_noise_sigma", self.target_noise_sigma),
            ("target_noise_clip", self.target_noise_clip),
            ("exploration_sigma", self.exploration_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(format!("{name} must be a finite non-negative number, got {v}"));
            }
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return fail("learning rates must be positive".into());
        }
        if self.hidden_sizes.contains(&0) {
            return fail("hidden layer sizes must be positive".into());
        }
        Ok(())
    }
}

/// Anything that scores state-action pairs and reports `dQ/da`.
pub trait ActionValue {
    /// Returns `Q(s_b, a_b)` and `dQ/da` for every row `b`.
    fn value_and_action_grad(
        &self,
        states: ArrayView2<f64>,
        actions: ArrayView2<f64>,
    ) -> Result<(Array1<f64>, Array2<f64>)>;
}

/// A critic network takes `[state, action]` as input.
impl ActionValue for Mlp {
    fn value_and_action_grad(
        &self,
        states: ArrayView2<f64>,
        actions: ArrayView2<f64>,
    ) -> Result<(Array1<f64>, Array2<f64>)> {
        let inputs = ndarray::concatenate(Axis(1), &[states, actions])
            .map_err(|_| Error::shape("critic batch rows", states.nrows(), actions.nrows()))?;
        let trace = self.forward_trace(inputs.view())?;
        let q = trace.output().column(0).to_owned();
        let ones = Array2::ones((inputs.nrows(), 1));
        let (_, input_grad) = self.backward_batch(&trace, ones.view())?;
        let dq_da = input_grad.slice(s![.., states.ncols()..]).to_owned();
        Ok((q, dq_da))
    }
}

/// Which networks an update step touched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic1_loss: f64,
    pub critic2_loss: f64,
    /// Present only on delayed actor steps.
    pub actor_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Td3Agent {
    pub actor: Mlp,
    pub actor_target: Mlp,
    pub critic1: Mlp,
    pub critic2: Mlp,
    pub critic1_target: Mlp,
    pub critic2_target: Mlp,
    pub actor_opt: Adam,
    pub critic1_opt: Adam,
    pub critic2_opt: Adam,
    obs_dim: usize,
    action_dim: usize,
    action_max: f64,
    critic_updates: u64,
    actor_updates: u64,
}

fn rows<'a>(vectors: impl ExactSizeIterator<Item = &'a [f64]>, width: usize) -> Array2<f64> {
    let n = vectors.len();
    let mut out = Array2::zeros((n, width));
    for (mut row, v) in out.outer_iter_mut().zip(vectors) {
        row.assign(&ndarray::ArrayView1::from(v));
    }
    out
}

fn check_finite(values: &Array1<f64>, context: &str) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::non_finite(format!("{context} (row {pos}: {})", values[pos])));
    }
    Ok(())
}

impl Td3Agent {
    /// Fresh agent; targets start as exact copies of the online networks.
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        action_dim: usize,
        action_max: f64,
        hidden: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        if !(action_max > 0.0 && action_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("action_max must be positive, got {action_max}")));
        }
        let sizes = |input: usize, output: usize| {
            let mut v = vec![input];
            v.extend_from_slice(hidden);
            v.push(output);
            v
        };
        let actor = Mlp::new_uniform(&sizes(obs_dim, action_dim), Activation::Relu, Activation::Tanh, rng)?;
        let critic_sizes = sizes(obs_dim + action_dim, 1);
        let critic1 = Mlp::new_uniform(&critic_sizes, Activation::Relu, Activation::Identity, rng)?;
        let critic2 = Mlp::new_uniform(&critic_sizes, Activation::Relu, Activation::Identity, rng)?;
        Self::from_networks(actor, critic1, critic2, action_max)
    }

    /// Wraps explicit networks. The actor must have a bounded output.
    pub fn from_networks(actor: Mlp, critic1: Mlp, critic2: Mlp, action_max: f64) -> Result<Self> {
        let obs_dim = actor.input_dim();
        let action_dim = actor.output_dim();
        if actor.output_activation() != Activation::Tanh {
            return Err(Error::Architecture("actor output must be bounded (tanh)".into()));
        }
        for c in [&critic1, &critic2] {
            if c.input_dim() != obs_dim + action_dim || c.output_dim() != 1 {
                return Err(Error::Architecture(format!(
                    "critic {:?} incompatible with obs_dim {obs_dim}, action_dim {action_dim}",
                    c.layer_sizes()
                )));
            }
        }
        Ok(Td3Agent {
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor_opt: Adam::new(&actor),
            critic1_opt: Adam::new(&critic1),
            critic2_opt: Adam::new(&critic2),
            actor,
            critic1,
            critic2,
            obs_dim,
            action_dim,
            action_max,
            critic_updates: 0,
            actor_updates: 0,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn action_max(&self) -> f64 {
        self.action_max
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    pub fn actor_updates(&self) -> u64 {
        self.actor_updates
    }

    fn scaled(&self, raw: Vector) -> Vector {
        raw.iter()
            .map(|x| (self.action_max * x).clamp(-self.action_max, self.action_max))
            .collect()
    }

    /// Deterministic policy action `pi(s)`, within `±action_max`.
    pub fn act(&self, state: &[f64]) -> Result<Vector> {
        Ok(self.scaled(self.actor.forward(state)?))
    }

    pub fn target_act(&self, state: &[f64]) -> Result<Vector> {
        Ok(self.scaled(self.target_actor_raw(state)?))
    }

    fn target_actor_raw(&self, state: &[f64]) -> Result<Vector> {
        self.actor_target.forward(state)
    }

    /// `min(Q1(s, a), Q2(s, a))` on the online critics.
    pub fn min_q(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        let input = Vector::from(state).concat(action);
        let q1 = self.critic1.forward(&input)?[0];
        let q2 = self.critic2.forward(&input)?[0];
        if !(q1.is_finite() && q2.is_finite()) {
            return Err(Error::non_finite(format!("critic bootstrap (q1 = {q1}, q2 = {q2})")));
        }
        Ok(q1.min(q2))
    }

    /// Behaviour action `clip(pi(s) + eps, ±A_max)`, `eps ~ N(0, sigma^2)`.
    pub fn explore_action<R: Rng + ?Sized>(&self, state: &[f64], cfg: &Td3Config, rng: &mut R) -> Result<Vector> {
        let a = self.act(state)?;
        Ok(a.iter()
            .map(|&x| (x + gaussian(rng, cfg.exploration_sigma)).clamp(-self.action_max, self.action_max))
            .collect())
    }

    /// `clip(pi'(s') + clip(eps, ±delta), ±A_max)`.
    pub fn smoothed_target_action<R: Rng + ?Sized>(
        &self,
        next_state: &[f64],
        cfg: &Td3Config,
        rng: &mut R,
    ) -> Result<Vector> {
        let a = self.target_act(next_state)?;
        Ok(a.iter()
            .map(|&x| self.smooth(x, cfg, rng))
            .collect())
    }

    #[inline]
    fn smooth<R: Rng + ?Sized>(&self, action: f64, cfg: &Td3Config, rng: &mut R) -> f64 {
        let noise = gaussian(rng, cfg.target_noise_sigma);
        smoothed(action, noise, cfg.target_noise_clip, self.action_max)
    }

    /// `y = r + gamma (1 - terminal) min(Q1'(s', a'), Q2'(s', a'))`.
    pub fn td3_target<R: Rng + ?Sized>(
        &self,
        reward: f64,
        next_state: &[f64],
        terminal: bool,
        cfg: &Td3Config,
        rng: &mut R,
    ) -> Result<f64> {
        let a = self.smoothed_target_action(next_state, cfg, rng)?;
        let input = Vector::from(next_state).concat(&a);
        let q1 = self.critic1_target.forward(&input)?[0];
        let q2 = self.critic2_target.forward(&input)?[0];
        if !(q1.is_finite() && q2.is_finite()) {
            return Err(Error::non_finite(format!("target critics (q1 = {q1}, q2 = {q2})")));
        }
        Ok(target_value(reward, terminal, cfg.gamma, q1, q2))
    }

    /// Batched targets; noise is drawn per row, per action dimension, in row order.
    fn batch_targets<R: Rng + ?Sized>(
        &self,
        batch: &[&Transition],
        cfg: &Td3Config,
        rng: &mut R,
    ) -> Result<Array1<f64>> {
        let next = rows(batch.iter().map(|t| &t.next_state[..]), self.obs_dim);
        let mut actions = self.actor_target.forward_batch(next.view())?;
        for x in actions.iter_mut() {
            let a = (self.action_max * *x).clamp(-self.action_max, self.action_max);
            *x = self.smooth(a, cfg, rng);
        }
        let input = ndarray::concatenate(Axis(1), &[next.view(), actions.view()]).expect("same rows");
        let q1 = self.critic1_target.forward_batch(input.view())?.column(0).to_owned();
        let q2 = self.critic2_target.forward_batch(input.view())?.column(0).to_owned();
        check_finite(&q1, "target critic 1")?;
        check_finite(&q2, "target critic 2")?;
        Ok(batch
            .iter()
            .enumerate()
            .map(|(i, t)| target_value(t.reward, t.terminal, cfg.gamma, q1[i], q2[i]))
            .collect())
    }

    /// One Adam step on each critic's MSE against a shared target.
    /// Returns the losses measured before the step.
    pub fn critic_update<R: Rng + ?Sized>(
        &mut self,
        batch: &[&Transition],
        cfg: &Td3Config,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("critic update needs a non-empty batch".into()));
        }
        let y = self.batch_targets(batch, cfg, rng)?;
        let inputs = rows(
            batch.iter().map(|t| t.state.concat(&t.action)).collect::<Vec<_>>().iter().map(|v| &v[..]),
            self.obs_dim + self.action_dim,
        );
        let n = batch.len() as f64;
        let mut losses = [0.0; 2];
        for (k, (critic, opt)) in [
            (&mut self.critic1, &mut self.critic1_opt),
            (&mut self.critic2, &mut self.critic2_opt),
        ]
        .into_iter()
        .enumerate()
        {
            let trace = critic.forward_trace(inputs.view())?;
            let residual = &trace.output().column(0) - &y;
            losses[k] = residual.mapv(|r| r * r).sum() / n;
            if !losses[k].is_finite() {
                return Err(Error::non_finite(format!("critic {} loss", k + 1)));
            }
            let upstream = residual.mapv(|r| 2.0 * r / n).insert_axis(Axis(1));
            let (grads, _) = critic.backward_batch(&trace, upstream.view())?;
            opt.step(critic, &grads, cfg.critic_lr)?;
        }
        Ok((losses[0], losses[1]))
    }

    /// One Adam step on `-mean Q1(s, pi(s))`. Critics are not modified.
    pub fn actor_update(&mut self, batch: &[&Transition], cfg: &Td3Config) -> Result<f64> {
        let critic = self.critic1.clone();
        self.actor_update_with(batch, &critic, cfg)
    }

    /// Actor ascent against an arbitrary action-value function.
    pub fn actor_update_with<C: ActionValue + ?Sized>(
        &mut self,
        batch: &[&Transition],
        critic: &C,
        cfg: &Td3Config,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("actor update needs a non-empty batch".into()));
        }
        let states = rows(batch.iter().map(|t| &t.state[..]), self.obs_dim);
        self.actor_step_on_states(states.view(), critic, cfg.actor_lr)
    }

    pub(crate) fn actor_step_on_states<C: ActionValue + ?Sized>(
        &mut self,
        states: ArrayView2<f64>,
        critic: &C,
        lr: f64,
    ) -> Result<f64> {
        let n = states.nrows() as f64;
        let trace = self.actor.forward_trace(states)?;
        let actions = trace.output().mapv(|x| self.action_max * x);
        let (q, dq_da) = critic.value_and_action_grad(states, actions.view())?;
        check_finite(&q, "actor objective")?;
        let loss = -q.sum() / n;
        // d(-mean Q)/d(raw) = -(A_max / n) dQ/da
        let upstream = dq_da.mapv(|g| -self.action_max * g / n);
        let (grads, _) = self.actor.backward_batch(&trace, upstream.view())?;
        self.actor_opt.step(&mut self.actor, &grads, lr)?;
        Ok(loss)
    }

    /// Polyak-blends all three targets toward their online networks.
    pub fn target_sync(&mut self, cfg: &Td3Config) -> Result<()> {
        polyak_update(&mut self.actor_target, &self.actor, cfg.tau)?;
        polyak_update(&mut self.critic1_target, &self.critic1, cfg.tau)?;
        polyak_update(&mut self.critic2_target, &self.critic2, cfg.tau)
    }

    /// Critic step, then actor and target steps every `policy_delay` calls.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        batch: &[&Transition],
        cfg: &Td3Config,
        rng: &mut R,
    ) -> Result<UpdateStats> {
        let (critic1_loss, critic2_loss) = self.critic_update(batch, cfg, rng)?;
        self.critic_updates += 1;
        let actor_loss = if self.critic_updates.is_multiple_of(cfg.policy_delay as u64) {
            let loss = self.actor_update(batch, cfg)?;
            self.target_sync(cfg)?;
            self.actor_updates += 1;
            Some(loss)
        } else {
            None
        };
        Ok(UpdateStats {
            critic1_loss,
            critic2_loss,
            actor_loss,
        })
    }

    const NETWORKS: [&'static str; 6] = [
        "actor",
        "actor_target",
        "critic1",
        "critic2",
        "critic1_target",
        "critic2_target",
    ];

    fn network(&self, name: &str) -> &Mlp {
        match name {
            "actor" => &self.actor,
            "actor_target" => &self.actor_target,
            "critic1" => &self.critic1,
            "critic2" => &self.critic2,
            "critic1_target" => &self.critic1_target,
            _ => &self.critic2_target,
        }
    }

    /// Writes all six networks, the three optimizers and `manifest.txt` into `dir`.
    pub fn save(&self, dir: &Path, extra: &[(String, String)]) -> Result<()> {
        fs::create_dir_all(dir)?;
        for name in Self::NETWORKS {
            save_mlp(&dir.join(format!("{name}.bin")), self.network(name))?;
        }
        save_adam(&dir.join("actor_adam.bin"), &self.actor_opt, &self.actor)?;
        save_adam(&dir.join("critic1_adam.bin"), &self.critic1_opt, &self.critic1)?;
        save_adam(&dir.join("critic2_adam.bin"), &self.critic2_opt, &self.critic2)?;
        let mut manifest = format!(
            "format_version={FORMAT_VERSION}\nobs_dim={}\naction_dim={}\naction_max={}\ncritic_updates={}\nactor_updates={}\n",
            self.obs_dim, self.action_dim, self.action_max, self.critic_updates, self.actor_updates
        );
        for (k, v) in extra {
            manifest.push_str(&format!("{k}={v}\n"));
        }
        fs::write(dir.join("manifest.txt"), manifest)?;
        Ok(())
    }

    /// Inverse of [`Td3Agent::save`]; also returns the manifest entries.
    pub fn load(dir: &Path) -> Result<(Self, BTreeMap<String, String>)> {
        let manifest_path = dir.join("manifest.txt");
        let text = fs::read_to_string(&manifest_path)?;
        let manifest: BTreeMap<String, String> = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        let field = |key: &str| -> Result<&String> {
            manifest.get(key).ok_or_else(|| Error::Checkpoint {
                path: manifest_path.clone(),
                reason: format!("missing `{key}`"),
            })
        };
        let parse_err = |key: &str| Error::Checkpoint {
            path: manifest_path.clone(),
            reason: format!("malformed `{key}`"),
        };
        let action_max: f64 = field("action_max")?.parse().map_err(|_| parse_err("action_max"))?;
        let critic_updates: u64 = field("critic_updates")?.parse().map_err(|_| parse_err("critic_updates"))?;
        let actor_updates: u64 = field("actor_updates")?.parse().map_err(|_| parse_err("actor_updates"))?;

        let load = |name: &str| load_mlp(&dir.join(format!("{name}.bin")));
        let mut agent = Self::from_networks(load("actor")?, load("critic1")?, load("critic2")?, action_max)?;
        agent.actor_target = load("actor_target")?;
        agent.critic1_target = load("critic1_target")?;
        agent.critic2_target = load("critic2_target")?;
        if !(agent.actor_target.same_architecture(&agent.actor)
            && agent.critic1_target.same_architecture(&agent.critic1)
            && agent.critic2_target.same_architecture(&agent.critic2))
        {
            return Err(Error::Checkpoint {
                path: dir.to_path_buf(),
                reason: "target network architecture differs from its online network".into(),
            });
        }
        agent.actor_opt = load_adam(&dir.join("actor_adam.bin"), &agent.actor)?;
        agent.critic1_opt = load_adam(&dir.join("critic1_adam.bin"), &agent.critic1)?;
        agent.critic2_opt = load_adam(&dir.join("critic2_adam.bin"), &agent.critic2)?;
        agent.critic_updates = critic_updates;
        agent.actor_updates = actor_updates;
        Ok((agent, manifest))
    }
}

/// Target-policy smoothing for one action component.
#[inline]
pub fn smoothed(action: f64, noise: f64, noise_clip: f64, action_max: f64) -> f64 {
    (action + noise.clamp(-noise_clip, noise_clip)).clamp(-action_max, action_max)
}

#[inline]
fn target_value(reward: f64, terminal: bool, gamma: f64, q1: f64, q2: f64) -> f64 {
    if terminal {
        reward
    } else {
        reward + gamma * q1.min(q2)
    }
}
