//! Named random substreams derived from one master seed.
//!
//! Every consumer of randomness gets its own ChaCha stream, so enabling the
//! beam planner never shifts the draws seen by weight init, exploration or
//! buffer sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    WeightInit,
    EnvReset,
    Exploration,
    Beam,
    Rollout,
    BufferSampling,
    TargetNoise,
    Evaluation,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::WeightInit => 1,
            Stream::EnvReset => 2,
            Stream::Exploration => 3,
            Stream::Beam => 4,
            Stream::Rollout => 5,
            Stream::BufferSampling => 6,
            Stream::TargetNoise => 7,
            Stream::Evaluation => 8,
        }
    }
}

/// Builds the generator for `stream` under `seed`.
pub fn substream(seed: u64, stream: Stream) -> StreamRng {
    indexed(seed, stream.id())
}

/// Generator for an arbitrary numbered stream, used for per-rollout streams.
pub fn indexed(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard normal draw scaled by `sigma`.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}
