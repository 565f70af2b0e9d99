use rand::RngCore;

use super::{
    DoubleIntegrator, DoubleIntegratorState, Env, EnvSpec, LinearTrack, LinearTrackState,
    PendulumState, PendulumSwingUp, ResetMode, StepResult,
};
use crate::error::{Error, Result};
use crate::nets::Vector;

pub const ENV_NAMES: [&str; 3] = [LinearTrack::NAME, DoubleIntegrator::NAME, PendulumSwingUp::NAME];

/// Any built-in environment, selected by name at runtime.
#[derive(Debug, Clone)]
pub enum BuiltinEnv {
    LinearTrack(LinearTrack),
    DoubleIntegrator(DoubleIntegrator),
    Pendulum(PendulumSwingUp),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinSnapshot {
    LinearTrack(LinearTrackState),
    DoubleIntegrator(DoubleIntegratorState),
    Pendulum(PendulumState),
}

impl BuiltinSnapshot {
    fn env_name(&self) -> &'static str {
        match self {
            BuiltinSnapshot::LinearTrack(_) => LinearTrack::NAME,
            BuiltinSnapshot::DoubleIntegrator(_) => DoubleIntegrator::NAME,
            BuiltinSnapshot::Pendulum(_) => PendulumSwingUp::NAME,
        }
    }
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Looks up an environment by name. Matching ignores case, `-` and `_`,
/// so `PendulumSwingUp` and `pendulum-swingup` are the same.
pub fn make_env(name: &str, mode: ResetMode) -> Result<BuiltinEnv> {
    match normalize(name).as_str() {
        "lineartrack" => Ok(BuiltinEnv::LinearTrack(LinearTrack::new(mode))),
        "doubleintegrator" => Ok(BuiltinEnv::DoubleIntegrator(DoubleIntegrator::new(mode))),
        "pendulumswingup" | "pendulum" => Ok(BuiltinEnv::Pendulum(PendulumSwingUp::new(mode))),
        _ => Err(Error::UnknownEnv(name.to_string())),
    }
}

macro_rules! dispatch {
    ($self:expr, $env:ident => $body:expr) => {
        match $self {
            BuiltinEnv::LinearTrack($env) => $body,
            BuiltinEnv::DoubleIntegrator($env) => $body,
            BuiltinEnv::Pendulum($env) => $body,
        }
    };
}

impl Env for BuiltinEnv {
    type Snapshot = BuiltinSnapshot;

    fn spec(&self) -> &EnvSpec {
        dispatch!(self, e => e.spec())
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vector {
        dispatch!(self, e => e.reset(rng))
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        dispatch!(self, e => e.step(action))
    }

    fn observe(&self) -> Vector {
        dispatch!(self, e => e.observe())
    }

    fn elapsed_steps(&self) -> usize {
        dispatch!(self, e => e.elapsed_steps())
    }

    fn snapshot(&self) -> BuiltinSnapshot {
        match self {
            BuiltinEnv::LinearTrack(e) => BuiltinSnapshot::LinearTrack(e.snapshot()),
            BuiltinEnv::DoubleIntegrator(e) => BuiltinSnapshot::DoubleIntegrator(e.snapshot()),
            BuiltinEnv::Pendulum(e) => BuiltinSnapshot::Pendulum(e.snapshot()),
        }
    }

    fn restore(&mut self, snapshot: &BuiltinSnapshot) -> Result<()> {
        match (self, snapshot) {
            (BuiltinEnv::LinearTrack(e), BuiltinSnapshot::LinearTrack(s)) => e.restore(s),
            (BuiltinEnv::DoubleIntegrator(e), BuiltinSnapshot::DoubleIntegrator(s)) => e.restore(s),
            (BuiltinEnv::Pendulum(e), BuiltinSnapshot::Pendulum(s)) => e.restore(s),
            (env, snap) => Err(Error::SnapshotMismatch {
                env: env.spec().name.clone(),
                snapshot: snap.env_name().to_string(),
            }),
        }
    }
}
