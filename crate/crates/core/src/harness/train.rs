use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, RngCore};

use super::config::{Algorithm, RunConfig};
use super::metrics::{MetricsRow, METRICS_HEADER};
use crate::envs::{make_env, Env, ResetMode};
use crate::error::{Error, Result};
use crate::mcbs::{plan_action, BudgetLedger, McbsConfig, PlannerRngs, Progress};
use crate::nets::Vector;
use crate::replay::{ReplayBuffer, Transition};
use crate::rng::{indexed, substream, Stream};
use crate::td3::{Td3Agent, Td3Config};

/// Offset of the random-policy baseline's action stream within the evaluation seed.
const BASELINE_ACTION_STREAM: u64 = 1;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub rows: Vec<MetricsRow>,
    /// Mean return of a uniform-random policy on the evaluation episodes.
    pub random_baseline: f64,
    pub ledger: BudgetLedger,
    pub agent: Td3Agent,
    pub metrics_path: PathBuf,
    pub checkpoint_dir: PathBuf,
}

impl TrainOutcome {
    pub fn final_row(&self) -> Option<&MetricsRow> {
        self.rows.last()
    }
}

fn mean_std(returns: &[f64]) -> (f64, f64) {
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs whole episodes on a private copy of `env`, returning (mean, population std).
fn rollout_episodes<E, F>(env: &E, episodes: usize, seed: u64, mut choose: F) -> Result<(f64, f64)>
where
    E: Env,
    F: FnMut(&E) -> Result<Vector>,
{
    if episodes == 0 {
        return Err(Error::InvalidArgument("evaluation needs at least one episode".into()));
    }
    let mut env = env.clone();
    let mut resets = indexed(seed, 0);
    let limit = env.spec().max_episode_steps;
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        env.reset(&mut resets);
        let mut total = 0.0;
        for _ in 0..limit {
            let action = choose(&env)?;
            let step = env.step(&action)?;
            total += step.reward;
            if step.done() {
                break;
            }
        }
        returns.push(total);
    }
    Ok(mean_std(&returns))
}

/// Deterministic-policy evaluation; neither `agent` nor `env` is modified.
pub fn evaluate<E: Env>(agent: &Td3Agent, env: &E, episodes: usize, seed: u64) -> Result<(f64, f64)> {
    rollout_episodes(env, episodes, seed, |e| agent.act(&e.observe()))
}

/// Evaluation with the beam planner choosing every action.
pub fn evaluate_with_beam<E: Env>(
    agent: &Td3Agent,
    env: &E,
    episodes: usize,
    seed: u64,
    mcbs: &McbsConfig,
    td3: &Td3Config,
) -> Result<(f64, f64)> {
    let cfg = McbsConfig {
        adaptive: false,
        ..mcbs.clone()
    };
    let mut rngs = PlannerRngs::from_seed(seed);
    let mut ledger = BudgetLedger::default();
    let mut unused = indexed(seed, 2);
    rollout_episodes(env, episodes, seed, |e| {
        let progress = Progress {
            real_step: 0,
            eval_history: &[],
        };
        Ok(plan_action(agent, e, &cfg, td3, &mut ledger, &mut rngs, &mut unused, progress)?.action)
    })
}

fn uniform_action<R: Rng + ?Sized>(dim: usize, bound: f64, rng: &mut R) -> Vector {
    (0..dim).map(|_| rng.random_range(-bound..=bound)).collect()
}

/// Uniform-random actions on the same evaluation episodes.
pub fn evaluate_random_policy<E: Env>(env: &E, episodes: usize, seed: u64) -> Result<(f64, f64)> {
    let mut actions = indexed(seed, BASELINE_ACTION_STREAM);
    let (dim, bound) = (env.spec().action_dim, env.spec().action_max);
    rollout_episodes(env, episodes, seed, |_| Ok(uniform_action(dim, bound, &mut actions)))
}

struct CsvSink {
    out: BufWriter<File>,
}

impl CsvSink {
    fn create(path: &PathBuf) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{METRICS_HEADER}")?;
        out.flush()?;
        Ok(CsvSink { out })
    }

    fn write(&mut self, row: &MetricsRow) -> Result<()> {
        writeln!(self.out, "{}", row.to_csv_line())?;
        self.out.flush()?;
        Ok(())
    }
}

/// Mutable state of one training run.
struct Run {
    cfg: RunConfig,
    env: crate::envs::BuiltinEnv,
    eval_env: crate::envs::BuiltinEnv,
    agent: Td3Agent,
    buffer: ReplayBuffer,
    ledger: BudgetLedger,
    planner: PlannerRngs,
    resets: crate::rng::StreamRng,
    exploration: crate::rng::StreamRng,
    sampling: crate::rng::StreamRng,
    target_noise: crate::rng::StreamRng,
    eval_seed: u64,
    eval_history: Vec<f64>,
    rows: Vec<MetricsRow>,
    episodes_done: u64,
    episode_return: f64,
    train_return_last: f64,
    started: Instant,
}

impl Run {
    fn new(cfg: RunConfig) -> Result<Self> {
        let env = make_env(&cfg.env_name, ResetMode::Random)?;
        let spec = env.spec().clone();
        let agent = Td3Agent::new(
            spec.obs_dim,
            spec.action_dim,
            spec.action_max,
            &cfg.td3.hidden_sizes,
            &mut substream(cfg.seed, Stream::WeightInit),
        )?;
        let buffer = ReplayBuffer::new(cfg.td3.replay_capacity, spec.obs_dim, spec.action_dim)?;
        Ok(Run {
            eval_env: env.clone(),
            env,
            agent,
            buffer,
            ledger: BudgetLedger::default(),
            planner: PlannerRngs::from_seed(cfg.seed),
            resets: substream(cfg.seed, Stream::EnvReset),
            exploration: substream(cfg.seed, Stream::Exploration),
            sampling: substream(cfg.seed, Stream::BufferSampling),
            target_noise: substream(cfg.seed, Stream::TargetNoise),
            eval_seed: substream(cfg.seed, Stream::Evaluation).next_u64(),
            eval_history: Vec::new(),
            rows: Vec::new(),
            episodes_done: 0,
            episode_return: 0.0,
            train_return_last: 0.0,
            started: Instant::now(),
            cfg,
        })
    }

    fn wall(&self) -> f64 {
        if self.cfg.record_wall_time {
            self.started.elapsed().as_secs_f64()
        } else {
            0.0
        }
    }

    fn choose_action(&mut self, step: u64) -> Result<Vector> {
        let spec = self.env.spec();
        if step <= self.cfg.td3.warmup_steps as u64 {
            return Ok(uniform_action(spec.action_dim, spec.action_max, &mut self.exploration));
        }
        match self.cfg.algorithm {
            Algorithm::Td3 => {
                self.ledger.actor_forwards += 1;
                self.agent
                    .explore_action(&self.env.observe(), &self.cfg.td3, &mut self.exploration)
            }
            Algorithm::McbsTd3 => {
                let progress = Progress {
                    real_step: step,
                    eval_history: &self.eval_history,
                };
                let plan = plan_action(
                    &self.agent,
                    &self.env,
                    &self.cfg.mcbs,
                    &self.cfg.td3,
                    &mut self.ledger,
                    &mut self.planner,
                    &mut self.exploration,
                    progress,
                )?;
                Ok(plan.action)
            }
        }
    }

    fn step(&mut self, step: u64) -> Result<()> {
        let state = self.env.observe();
        let action = self.choose_action(step)?;
        let result = self.env.step(&action)?;
        self.ledger.real_env_steps += 1;
        self.episode_return += result.reward;
        let done = result.done();
        self.buffer.push(Transition {
            state,
            action,
            reward: result.reward,
            next_state: result.obs,
            terminal: result.terminal,
        })?;
        if done {
            self.episodes_done += 1;
            self.train_return_last = self.episode_return;
            self.episode_return = 0.0;
            self.env.reset(&mut self.resets);
        }

        let td3 = &self.cfg.td3;
        if step > td3.warmup_steps as u64 && self.buffer.len() >= td3.batch_size {
            let batch = self.buffer.sample(td3.batch_size, &mut self.sampling)?;
            let stats = self.agent.update(&batch, td3, &mut self.target_noise)?;
            if !(stats.critic1_loss.is_finite() && stats.critic2_loss.is_finite()) {
                return Err(Error::non_finite(format!("critic loss at step {step}")));
            }
        }
        Ok(())
    }

    fn evaluate_now(&mut self, step: u64) -> Result<MetricsRow> {
        let (mean, std) = if self.cfg.eval_with_beam {
            evaluate_with_beam(
                &self.agent,
                &self.eval_env,
                self.cfg.eval_episodes,
                self.eval_seed,
                &self.cfg.mcbs,
                &self.cfg.td3,
            )?
        } else {
            evaluate(&self.agent, &self.eval_env, self.cfg.eval_episodes, self.eval_seed)?
        };
        if !mean.is_finite() {
            return Err(Error::non_finite(format!("evaluation return at step {step}")));
        }
        self.eval_history.push(mean);
        Ok(MetricsRow {
            real_step: step,
            episodes_done: self.episodes_done,
            train_return_last: self.train_return_last,
            eval_return_mean: mean,
            eval_return_std: std,
            rollout_env_steps_cum: self.ledger.rollout_env_steps,
            beam_on_fraction: self.ledger.beam_on_fraction(),
            wall_seconds: self.wall(),
        })
    }

    fn diagnostic_row(&self, step: u64) -> MetricsRow {
        MetricsRow {
            real_step: step,
            episodes_done: self.episodes_done,
            train_return_last: self.train_return_last,
            eval_return_mean: f64::NAN,
            eval_return_std: f64::NAN,
            rollout_env_steps_cum: self.ledger.rollout_env_steps,
            beam_on_fraction: self.ledger.beam_on_fraction(),
            wall_seconds: self.wall(),
        }
    }
}

/// Full training run: warmup, then act / step / store / update each step,
/// with an evaluation row every `eval_interval` real steps and a final
/// checkpoint under `out_dir/checkpoint`.
pub fn train(cfg: &RunConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let metrics_path = cfg.out_dir.join("metrics.csv");
    let checkpoint_dir = cfg.out_dir.join("checkpoint");
    let mut sink = CsvSink::create(&metrics_path)?;
    let mut run = Run::new(cfg.clone())?;
    let (random_baseline, _) = evaluate_random_policy(&run.eval_env, cfg.eval_episodes, run.eval_seed)?;
    run.env.reset(&mut run.resets);

    let total = cfg.total_steps as u64;
    let interval = cfg.eval_interval as u64;
    for step in 1..=total {
        let outcome = run.step(step).and_then(|_| {
            if step % interval == 0 || step == total {
                run.evaluate_now(step).map(Some)
            } else {
                Ok(None)
            }
        });
        match outcome {
            Ok(Some(row)) => {
                sink.write(&row)?;
                run.rows.push(row);
            }
            Ok(None) => {}
            Err(e) => {
                let row = run.diagnostic_row(step);
                sink.write(&row)?;
                fs::write(cfg.out_dir.join("error.txt"), format!("step {step}: {e}\n"))?;
                return Err(e);
            }
        }
    }

    let mut manifest = cfg.to_pairs();
    manifest.push(("random_baseline".into(), random_baseline.to_string()));
    run.agent.save(&checkpoint_dir, &manifest)?;
    let ledger = run.ledger;
    fs::write(
        cfg.out_dir.join("summary.txt"),
        format!(
            "random_baseline={random_baseline}\nreal_env_steps={}\nrollout_env_steps={}\nactor_forwards={}\ncritic_forwards={}\nplanning_calls={}\nbeam_on_calls={}\n",
            ledger.real_env_steps,
            ledger.rollout_env_steps,
            ledger.actor_forwards,
            ledger.critic_forwards,
            ledger.planning_calls,
            ledger.beam_on_calls
        ),
    )?;
    Ok(TrainOutcome {
        rows: run.rows,
        random_baseline,
        ledger,
        agent: run.agent,
        metrics_path,
        checkpoint_dir,
    })
}
