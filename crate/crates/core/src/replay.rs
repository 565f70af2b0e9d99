//! Fixed-capacity FIFO replay buffer with uniform sampling.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nets::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vector,
    pub action: Vector,
    pub reward: f64,
    pub next_state: Vector,
    /// Genuine terminal state; time-limit truncation is not terminal.
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    action_dim: usize,
    storage: Vec<Transition>,
    // Slot the next push writes to once the ring is full.
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize, action_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("replay capacity must be positive".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            obs_dim,
            action_dim,
            storage: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.state.len() != self.obs_dim {
            return Err(Error::shape("transition state", self.obs_dim, t.state.len()));
        }
        if t.next_state.len() != self.obs_dim {
            return Err(Error::shape("transition next_state", self.obs_dim, t.next_state.len()));
        }
        if t.action.len() != self.action_dim {
            return Err(Error::shape("transition action", self.action_dim, t.action.len()));
        }
        if !(t.state.is_finite() && t.next_state.is_finite() && t.action.is_finite() && t.reward.is_finite())
        {
            return Err(Error::non_finite("transition"));
        }
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.cursor] = t;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
        Ok(())
    }

    /// Uniform draw with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        if batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        if self.storage.len() < batch_size {
            return Err(Error::InsufficientSamples {
                size: self.storage.len(),
                batch: batch_size,
            });
        }
        Ok((0..batch_size)
            .map(|_| &self.storage[rng.random_range(0..self.storage.len())])
            .collect())
    }

    /// Stored transitions from oldest to newest.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.storage.split_at(self.cursor);
        older.iter().chain(newer.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stream};
    use proptest::prelude::*;

    fn tr(tag: f64) -> Transition {
        Transition {
            state: Vector::from([tag]),
            action: Vector::from([0.0]),
            reward: tag,
            next_state: Vector::from([tag + 1.0]),
            terminal: false,
        }
    }

    #[test]
    fn push_counts() {
        let mut buf = ReplayBuffer::new(10, 1, 1).unwrap();
        buf.push(tr(0.0)).unwrap();
        assert_eq!(buf.len(), 1);
    }

    #[test]
    fn ring_evicts_oldest() {
        let mut buf = ReplayBuffer::new(3, 1, 1).unwrap();
        for i in 0..4 {
            buf.push(tr(i as f64)).unwrap();
        }
        assert_eq!(buf.len(), 3);
        let rewards: Vec<f64> = buf.iter_oldest_first().map(|t| t.reward).collect();
        assert_eq!(rewards, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn singleton_sampling() {
        let mut buf = ReplayBuffer::new(4, 1, 1).unwrap();
        buf.push(tr(7.0)).unwrap();
        let mut rng = substream(0, Stream::BufferSampling);
        assert_eq!(buf.sample(1, &mut rng).unwrap(), vec![&tr(7.0)]);
    }

    #[test]
    fn batch_larger_than_size_is_rejected() {
        let mut buf = ReplayBuffer::new(4, 1, 1).unwrap();
        buf.push(tr(1.0)).unwrap();
        let mut rng = substream(0, Stream::BufferSampling);
        assert!(matches!(
            buf.sample(5, &mut rng),
            Err(Error::InsufficientSamples { size: 1, batch: 5 })
        ));
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut buf = ReplayBuffer::new(50, 1, 1).unwrap();
        for i in 0..50 {
            buf.push(tr(i as f64)).unwrap();
        }
        let a = buf.sample(16, &mut substream(9, Stream::BufferSampling)).unwrap();
        let b = buf.sample(16, &mut substream(9, Stream::BufferSampling)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shape_violations_are_rejected() {
        let mut buf = ReplayBuffer::new(4, 2, 1).unwrap();
        assert!(matches!(buf.push(tr(0.0)), Err(Error::Shape { .. })));
        let mut bad = tr(0.0);
        bad.reward = f64::NAN;
        let mut buf = ReplayBuffer::new(4, 1, 1).unwrap();
        assert!(buf.push(bad).is_err());
        assert!(buf.is_empty());
    }

    proptest! {
        #[test]
        fn fifo_holds_most_recent(capacity in 1usize..12, pushes in 0usize..40) {
            let mut buf = ReplayBuffer::new(capacity, 1, 1).unwrap();
            for i in 0..pushes {
                buf.push(tr(i as f64)).unwrap();
            }
            let kept: Vec<f64> = buf.iter_oldest_first().map(|t| t.reward).collect();
            let expected: Vec<f64> = (pushes.saturating_sub(capacity)..pushes).map(|i| i as f64).collect();
            prop_assert_eq!(kept, expected);
        }

        #[test]
        fn samples_come_from_live_slots(capacity in 1usize..8, pushes in 1usize..30, seed in any::<u64>()) {
            let mut buf = ReplayBuffer::new(capacity, 1, 1).unwrap();
            for i in 0..pushes {
                buf.push(tr(i as f64)).unwrap();
            }
            let oldest = pushes.saturating_sub(capacity) as f64;
            let mut rng = substream(seed, Stream::BufferSampling);
            for t in buf.sample(buf.len(), &mut rng).unwrap() {
                prop_assert!(t.reward >= oldest && t.reward < pushes as f64);
            }
        }
    }
}
