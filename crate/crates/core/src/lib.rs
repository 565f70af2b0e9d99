//! TD3 with Monte Carlo beam search (MCBS) action selection.
//!
//! The crate is organised bottom-up:
//!
//! * [`nets`]: dense MLPs with hand-written backpropagation, Adam, Polyak
//!   blending and a binary checkpoint format.
//! * [`envs`]: small deterministic control tasks with exact snapshot/restore.
//! * [`replay`]: a FIFO ring buffer with uniform sampling.
//! * [`td3`]: the twin-critic learner.
//! * [`mcbs`]: beam candidate generation, short-horizon rollouts, argmax
//!   selection and the reward-saturation schedule.
//! * [`harness`]: training loop, evaluation, metrics CSV and ablation grids.
//!
//! Rollouts inside one planning call run on rayon when the `parallel`
//! feature is enabled; results are reduced in index order, so parallel and
//! sequential execution give bit-identical outputs.

pub mod envs;
pub mod error;
pub mod exec;
pub mod harness;
pub mod mcbs;
pub mod nets;
pub mod replay;
pub mod rng;
pub mod td3;

pub use error::{Error, Result};
pub use nets::Vector;
