//! Flat `key=value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key can also be
//! passed on the command line as `--key value`. Noise scales left unset
//! default to fixed fractions of the environment's `action_max`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::envs::{make_env, Env, ResetMode};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mcbs::McbsConfig;
use crate::td3::Td3Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Td3,
    McbsTd3,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Td3 => "td3",
            Algorithm::McbsTd3 => "mcbs-td3",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "td3" => Ok(Algorithm::Td3),
            "mcbs-td3" | "mcbs" => Ok(Algorithm::McbsTd3),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env_name: String,
    pub algorithm: Algorithm,
    pub total_steps: usize,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub seed: u64,
    pub td3: Td3Config,
    pub mcbs: McbsConfig,
    pub out_dir: PathBuf,
    /// Evaluate with the beam planner in the loop instead of the raw policy.
    pub eval_with_beam: bool,
    /// When false, `wall_seconds` is written as 0 so runs are byte-reproducible.
    pub record_wall_time: bool,
}

impl RunConfig {
    /// Defaults for `env_name`, noise scaled to its action bound.
    pub fn for_env(env_name: &str) -> Result<Self> {
        let env = make_env(env_name, ResetMode::Random)?;
        let spec = env.spec();
        let budget = match spec.name.as_str() {
            "linear-track" => 20_000,
            "double-integrator" => 50_000,
            _ => 150_000,
        };
        Ok(RunConfig {
            env_name: spec.name.clone(),
            algorithm: Algorithm::McbsTd3,
            total_steps: budget,
            eval_interval: 1000,
            eval_episodes: 10,
            seed: 0,
            td3: Td3Config::for_action_max(spec.action_max),
            mcbs: McbsConfig::for_action_max(spec.action_max),
            out_dir: PathBuf::from("runs").join(&spec.name),
            eval_with_beam: false,
            record_wall_time: true,
        })
    }

    /// Builds a config from ordered `key=value` pairs; later pairs win.
    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> Result<Self> {
        let env = pairs
            .iter()
            .rev()
            .find(|(k, _)| matches!(normalize_key(k.as_ref()).as_str(), "env" | "env_name"))
            .map(|(_, v)| v.as_ref().to_string())
            .ok_or_else(|| Error::Config("missing `env`".into()))?;
        let mut cfg = RunConfig::for_env(&env)?;
        for (k, v) in pairs {
            cfg.set(k.as_ref(), v.as_ref())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config file, then applies `overrides` on top.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut pairs = parse_pairs(&text)?;
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(&pairs)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let key = normalize_key(key);
        match key.as_str() {
            "env" | "env_name" => {
                let env = make_env(value, ResetMode::Random)?;
                self.env_name = env.spec().name.clone();
            }
            "algorithm" => self.algorithm = value.parse()?,
            "total_steps" => self.total_steps = parse(&key, value)?,
            "eval_interval" => self.eval_interval = parse(&key, value)?,
            "eval_episodes" => self.eval_episodes = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "eval_with_beam" => self.eval_with_beam = parse_bool(&key, value)?,
            "record_wall_time" => self.record_wall_time = parse_bool(&key, value)?,

            "gamma" => self.td3.gamma = parse(&key, value)?,
            "tau" => self.td3.tau = parse(&key, value)?,
            "policy_delay" => self.td3.policy_delay = parse(&key, value)?,
            "target_noise_sigma" => self.td3.target_noise_sigma = parse(&key, value)?,
            "target_noise_clip" => self.td3.target_noise_clip = parse(&key, value)?,
            "exploration_sigma" => self.td3.exploration_sigma = parse(&key, value)?,
            "batch_size" => self.td3.batch_size = parse(&key, value)?,
            "warmup_steps" => self.td3.warmup_steps = parse(&key, value)?,
            "actor_lr" => self.td3.actor_lr = parse(&key, value)?,
            "critic_lr" => self.td3.critic_lr = parse(&key, value)?,
            "replay_capacity" => self.td3.replay_capacity = parse(&key, value)?,
            "hidden_sizes" => {
                self.td3.hidden_sizes = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse(&key, s.trim()))
                    .collect::<Result<_>>()?
            }

            "beam_width" => self.mcbs.beam_width = parse(&key, value)?,
            "rollout_depth" => self.mcbs.rollout_depth = parse(&key, value)?,
            "num_sims" => self.mcbs.num_sims = parse(&key, value)?,
            "beam_noise_sigma" => self.mcbs.beam_noise_sigma = parse(&key, value)?,
            "adaptive" => self.mcbs.adaptive = parse_bool(&key, value)?,
            "saturation_window" => self.mcbs.saturation_window = parse(&key, value)?,
            "saturation_epsilon" => self.mcbs.saturation_epsilon = parse(&key, value)?,
            "min_beam_interval" => self.mcbs.min_beam_interval = parse(&key, value)?,
            "selection_noise_sigma" => self.mcbs.selection_noise_sigma = parse(&key, value)?,
            "parallel" => {
                self.mcbs.execution = if parse_bool(&key, value)? {
                    Execution::Parallel
                } else {
                    Execution::Sequential
                }
            }
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.td3.validate()?;
        self.mcbs.validate()?;
        if self.eval_interval == 0 || self.eval_episodes == 0 {
            return Err(Error::Config("eval_interval and eval_episodes must be positive".into()));
        }
        if self.total_steps > 0 && self.eval_interval > self.total_steps {
            return Err(Error::Config(format!(
                "eval_interval {} exceeds total_steps {}",
                self.eval_interval, self.total_steps
            )));
        }
        Ok(())
    }

    /// Every setting as `key=value` pairs, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let t = &self.td3;
        let m = &self.mcbs;
        let hidden = t
            .hidden_sizes
            .iter()
            .map(|h| h.to_string())
            .collect::<Vec<_>>()
            .join(",");
        [
            ("env", self.env_name.clone()),
            ("algorithm", self.algorithm.to_string()),
            ("total_steps", self.total_steps.to_string()),
            ("eval_interval", self.eval_interval.to_string()),
            ("eval_episodes", self.eval_episodes.to_string()),
            ("seed", self.seed.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("eval_with_beam", self.eval_with_beam.to_string()),
            ("record_wall_time", self.record_wall_time.to_string()),
            ("gamma", t.gamma.to_string()),
            ("tau", t.tau.to_string()),
            ("policy_delay", t.policy_delay.to_string()),
            ("target_noise_sigma", t.target_noise_sigma.to_string()),
            ("target_noise_clip", t.target_noise_clip.to_string()),
            ("exploration_sigma", t.exploration_sigma.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("warmup_steps", t.warmup_steps.to_string()),
            ("actor_lr", t.actor_lr.to_string()),
            ("critic_lr", t.critic_lr.to_string()),
            ("replay_capacity", t.replay_capacity.to_string()),
            ("hidden_sizes", hidden),
            ("beam_width", m.beam_width.to_string()),
            ("rollout_depth", m.rollout_depth.to_string()),
            ("num_sims", m.num_sims.to_string()),
            ("beam_noise_sigma", m.beam_noise_sigma.to_string()),
            ("adaptive", m.adaptive.to_string()),
            ("saturation_window", m.saturation_window.to_string()),
            ("saturation_epsilon", m.saturation_epsilon.to_string()),
            ("min_beam_interval", m.min_beam_interval.to_string()),
            ("selection_noise_sigma", m.selection_noise_sigma.to_string()),
            ("parallel", (m.execution == Execution::Parallel).to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Renders the config in the file format accepted by [`RunConfig::load`].
    pub fn to_config_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_").to_ascii_lowercase()
}

/// Splits config text into `(key, value)` pairs.
pub(crate) fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{l}`", n + 1)))
        })
        .collect()
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}
