//! A set of arms run under one UCB1 index.
//!
//! Arms are bucketed by their exact statistics `(n, successes)`. Arms in the
//! same bucket share one index value, and for a fixed `n` the index grows with
//! the success count, so the argmax only has to look at the top bucket of each
//! pull count. With thousands of replicas this keeps a round at
//! O(distinct pull counts) instead of O(arms).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::index::{ucb1_index_ln, TIE_TOLERANCE};
use super::TieBreak;
use crate::model::ArmId;
use crate::random::{choose, RandomSource, Stream};

#[derive(Debug, Clone, Default)]
pub(crate) struct ArmPool {
    members: Vec<ArmId>,
    keys: Vec<(u64, u64)>,
    slots: Vec<usize>,
    unexplored: Vec<usize>,
    buckets: BTreeMap<u64, BTreeMap<u64, Vec<usize>>>,
}

impl ArmPool {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn len(&self) -> usize {
        self.members.len()
    }

    pub(crate) fn members(&self) -> &[ArmId] {
        &self.members
    }

    pub(crate) fn member(&self, local: usize) -> ArmId {
        self.members[local]
    }

    /// Adds an unexplored arm and returns its local index.
    pub(crate) fn insert(&mut self, arm: ArmId) -> usize {
        let local = self.members.len();
        self.members.push(arm);
        self.keys.push((0, 0));
        self.slots.push(self.unexplored.len());
        self.unexplored.push(local);
        local
    }

    /// Records one pull of `local` with a binary reward.
    pub(crate) fn record(&mut self, local: usize, reward: u8) {
        let (n, s) = self.keys[local];
        if n == 0 {
            let slot = self.slots[local];
            self.unexplored.swap_remove(slot);
            if let Some(&moved) = self.unexplored.get(slot) {
                self.slots[moved] = slot;
            }
        } else {
            let level = self.buckets.get_mut(&n).expect("bucket level");
            let bucket = level.get_mut(&s).expect("bucket");
            let slot = self.slots[local];
            bucket.swap_remove(slot);
            if let Some(&moved) = bucket.get(slot) {
                self.slots[moved] = slot;
            }
            if bucket.is_empty() {
                level.remove(&s);
                if level.is_empty() {
                    self.buckets.remove(&n);
                }
            }
        }
        let key = (n + 1, s + u64::from(reward));
        self.keys[local] = key;
        let bucket = self
            .buckets
            .entry(key.0)
            .or_default()
            .entry(key.1)
            .or_default();
        self.slots[local] = bucket.len();
        bucket.push(local);
    }

    /// Chooses a local index: an unexplored arm if any, otherwise an argmax of
    /// `mean + sqrt(2 ln(clock) / n)` where `ln_clock` is the log of the clock.
    pub(crate) fn select<R: RandomSource + ?Sized>(
        &self,
        ln_clock: f64,
        tie: TieBreak,
        rng: &mut R,
    ) -> usize {
        assert!(!self.members.is_empty(), "selection from an empty arm pool");
        if !self.unexplored.is_empty() {
            return match tie {
                TieBreak::Uniform => {
                    self.unexplored[choose(rng, Stream::Arm, self.unexplored.len())]
                }
                TieBreak::Lowest => *self
                    .unexplored
                    .iter()
                    .min_by_key(|&&l| self.members[l])
                    .expect("non-empty"),
            };
        }

        let tops = || {
            self.buckets.iter().map(|(&n, level)| {
                let (&s, bucket) = level.iter().next_back().expect("non-empty level");
                (ucb1_index_ln(s as f64 / n as f64, n, ln_clock), bucket)
            })
        };
        let best = tops().map(|(v, _)| v).fold(f64::NEG_INFINITY, f64::max);
        let tied = || {
            tops()
                .filter(|(v, _)| *v >= best - TIE_TOLERANCE)
                .map(|(_, b)| b)
        };

        match tie {
            TieBreak::Uniform => {
                let total: usize = tied().map(Vec::len).sum();
                let mut u = choose(rng, Stream::Arm, total);
                for bucket in tied() {
                    if u < bucket.len() {
                        return bucket[u];
                    }
                    u -= bucket.len();
                }
                unreachable!("tie draw out of range")
            }
            TieBreak::Lowest => tied()
                .flat_map(|b| b.iter().copied())
                .min_by_key(|&l| self.members[l])
                .expect("at least one tied arm"),
        }
    }
}
