//! Randomness used by policies and reward draws.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which independent stream a draw comes from.
///
/// Agent-level choices, arm-level choices and rewards use separate streams so
/// that changing how many arms an agent registers does not perturb the
/// agent-level decisions or the reward sequence of a coupled run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Agent,
    Arm,
    Reward,
}

pub trait RandomSource {
    /// Uniform index in `0..len`. `len` is at least 2; callers resolve
    /// single-option choices without drawing.
    fn pick(&mut self, stream: Stream, len: usize) -> usize;

    /// `true` with probability `p`, drawn from [`Stream::Reward`].
    fn bernoulli(&mut self, p: f64) -> bool;
}

impl<R: RandomSource + ?Sized> RandomSource for &mut R {
    fn pick(&mut self, stream: Stream, len: usize) -> usize {
        (**self).pick(stream, len)
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        (**self).bernoulli(p)
    }
}

/// Three ChaCha8 streams derived from one 64-bit seed.
#[derive(Debug, Clone)]
pub struct SeededSource {
    agent: ChaCha8Rng,
    arm: ChaCha8Rng,
    reward: ChaCha8Rng,
}

impl SeededSource {
    pub fn new(seed: u64) -> Self {
        let stream = |n: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n);
            rng
        };
        Self {
            agent: stream(1),
            arm: stream(2),
            reward: stream(3),
        }
    }
}

impl RandomSource for SeededSource {
    fn pick(&mut self, stream: Stream, len: usize) -> usize {
        let rng = match stream {
            Stream::Agent => &mut self.agent,
            Stream::Arm => &mut self.arm,
            Stream::Reward => &mut self.reward,
        };
        rng.gen_range(0..len)
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        // One uniform per call keeps reward draws aligned round by round.
        self.reward.gen::<f64>() < p
    }
}

/// Resolves a uniform choice among `len` options, drawing only when needed.
pub(crate) fn choose<R: RandomSource + ?Sized>(rng: &mut R, stream: Stream, len: usize) -> usize {
    debug_assert!(len > 0);
    if len == 1 {
        0
    } else {
        rng.pick(stream, len)
    }
}

/// Uniform sample of `k` items without replacement (partial Fisher-Yates).
/// Returns every item, in order and without drawing, when `k >= items.len()`.
pub fn sample_without_replacement<T: Copy, R: RandomSource + ?Sized>(
    items: &[T],
    k: usize,
    stream: Stream,
    rng: &mut R,
) -> Vec<T> {
    if k >= items.len() {
        return items.to_vec();
    }
    let mut pool = items.to_vec();
    for j in 0..k {
        let r = j + choose(rng, stream, pool.len() - j);
        pool.swap(j, r);
    }
    pool.truncate(k);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_each_other() {
        let mut a = SeededSource::new(5);
        let mut b = SeededSource::new(5);
        for _ in 0..100 {
            b.pick(Stream::Arm, 7);
        }
        for _ in 0..100 {
            assert_eq!(a.pick(Stream::Agent, 9), b.pick(Stream::Agent, 9));
            assert_eq!(a.bernoulli(0.3), b.bernoulli(0.3));
        }
    }

    #[test]
    fn sample_has_no_duplicates() {
        let mut rng = SeededSource::new(1);
        let items: Vec<usize> = (0..50).collect();
        for k in [0, 1, 10, 49, 50, 80] {
            let mut s = sample_without_replacement(&items, k, Stream::Arm, &mut rng);
            assert_eq!(s.len(), k.min(50));
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), k.min(50));
        }
    }
}
