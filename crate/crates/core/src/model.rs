//! Problem instances: original arms, agent strategies and their expansion
//! into the registered arm universe.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::random::RandomSource;

pub type AgentId = u32;
pub type ArmId = usize;

/// One of an agent's unique underlying arms, with a Bernoulli mean.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OriginalArm {
    pub agent_id: AgentId,
    /// 1-based position within the agent's originals.
    pub origin_index: u32,
    pub mean: f64,
}

/// An agent's originals together with how many copies of each it registers.
///
/// A copy count of zero hides that original.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentProfile {
    pub agent_id: AgentId,
    pub originals: Vec<OriginalArm>,
    pub copy_counts: Vec<u32>,
}

impl AgentProfile {
    /// Builds a profile from parallel `means` / `copies` lists; origin indices
    /// are assigned 1, 2, ... in order.
    pub fn new(agent_id: AgentId, means: &[f64], copies: &[u32]) -> Self {
        let originals = means
            .iter()
            .enumerate()
            .map(|(k, &mean)| OriginalArm {
                agent_id,
                origin_index: k as u32 + 1,
                mean,
            })
            .collect();
        Self {
            agent_id,
            originals,
            copy_counts: copies.to_vec(),
        }
    }

    pub fn single(agent_id: AgentId, mean: f64, copies: u32) -> Self {
        Self::new(agent_id, &[mean], &[copies])
    }

    /// |S_i|, the number of arms this strategy registers.
    pub fn strategy_size(&self) -> u64 {
        self.copy_counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// The same originals with every copy count multiplied by `factor`.
    pub fn replicated(&self, factor: u32) -> Self {
        Self {
            copy_counts: self.copy_counts.iter().map(|&c| c * factor).collect(),
            ..self.clone()
        }
    }

    /// Best mean over all originals, registered or hidden.
    pub fn best_mean(&self) -> f64 {
        self.originals
            .iter()
            .map(|o| o.mean)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let agent_id = self.agent_id;
        if self.originals.len() != self.copy_counts.len() {
            return Err(Error::CopyCountMismatch {
                agent_id,
                originals: self.originals.len(),
                copies: self.copy_counts.len(),
            });
        }
        for (k, o) in self.originals.iter().enumerate() {
            if o.agent_id != agent_id {
                return Err(Error::ForeignOriginal {
                    agent_id,
                    origin_index: o.origin_index,
                    found: o.agent_id,
                });
            }
            if !(0.0..=1.0).contains(&o.mean) {
                return Err(Error::InvalidMean {
                    agent_id,
                    origin_index: o.origin_index,
                    mean: o.mean,
                });
            }
            if self.originals[..k]
                .iter()
                .any(|p| p.origin_index == o.origin_index)
            {
                return Err(Error::DuplicateOrigin {
                    agent_id,
                    origin_index: o.origin_index,
                });
            }
        }
        if self.strategy_size() == 0 {
            return Err(Error::EmptyStrategy { agent_id });
        }
        Ok(())
    }
}

/// A registered arm: one copy of one original.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegisteredArm {
    pub arm_id: ArmId,
    pub agent_id: AgentId,
    pub origin_index: u32,
    /// 1-based copy number in `1..=c_{i,k}`.
    pub copy_index: u32,
    pub mean: f64,
}

/// The registered arm universe built from every agent's strategy.
///
/// Agents are stored sorted by id; arms of one agent occupy a contiguous id
/// range. Internally agents are addressed by their position ("agent index").
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    agents: Vec<AgentProfile>,
    arms: Vec<RegisteredArm>,
    arm_agent: Vec<usize>,
    agent_arms: Vec<Range<ArmId>>,
}

/// Expands agent profiles into registered arms.
///
/// Arm ids are dense and assigned in `(agent_id, origin_index, copy_index)`
/// order, so the result depends only on the profiles.
pub fn build_instance(profiles: &[AgentProfile]) -> Result<Instance> {
    if profiles.is_empty() {
        return Err(Error::NoAgents);
    }
    let mut agents = profiles.to_vec();
    agents.sort_by_key(|p| p.agent_id);
    for w in agents.windows(2) {
        if w[0].agent_id == w[1].agent_id {
            return Err(Error::DuplicateAgent(w[0].agent_id));
        }
    }
    for p in &agents {
        p.validate()?;
    }

    let mut arms = Vec::new();
    let mut arm_agent = Vec::new();
    let mut agent_arms = Vec::with_capacity(agents.len());
    for (index, p) in agents.iter_mut().enumerate() {
        // Keep originals and their copy counts paired while sorting.
        let mut paired: Vec<(OriginalArm, u32)> =
            p.originals.drain(..).zip(p.copy_counts.drain(..)).collect();
        paired.sort_by_key(|(o, _)| o.origin_index);
        let start = arms.len();
        for (o, copies) in &paired {
            for copy in 1..=*copies {
                arms.push(RegisteredArm {
                    arm_id: arms.len(),
                    agent_id: p.agent_id,
                    origin_index: o.origin_index,
                    copy_index: copy,
                    mean: o.mean,
                });
                arm_agent.push(index);
            }
        }
        agent_arms.push(start..arms.len());
        let (originals, copy_counts) = paired.into_iter().unzip();
        p.originals = originals;
        p.copy_counts = copy_counts;
    }

    Ok(Instance {
        agents,
        arms,
        arm_agent,
        agent_arms,
    })
}

impl Instance {
    pub fn agents(&self) -> &[AgentProfile] {
        &self.agents
    }

    pub fn arms(&self) -> &[RegisteredArm] {
        &self.arms
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    pub fn arm(&self, arm: ArmId) -> Option<&RegisteredArm> {
        self.arms.get(arm)
    }

    /// Agent index owning `arm`.
    pub fn agent_of(&self, arm: ArmId) -> usize {
        self.arm_agent[arm]
    }

    /// Arm ids registered by the agent at `index` (S_i).
    pub fn agent_arms(&self, index: usize) -> Range<ArmId> {
        self.agent_arms[index].clone()
    }

    pub fn agent_id(&self, index: usize) -> AgentId {
        self.agents[index].agent_id
    }

    pub fn agent_index(&self, agent_id: AgentId) -> Option<usize> {
        self.agents
            .binary_search_by_key(&agent_id, |p| p.agent_id)
            .ok()
    }

    /// Total number of originals over all agents, hidden ones included.
    pub fn original_count(&self) -> usize {
        self.agents.iter().map(|p| p.originals.len()).sum()
    }

    /// The profiles with agent `agent_id`'s copy counts multiplied by `factor`.
    pub fn profiles_with_replication(&self, agent_id: AgentId, factor: u32) -> Vec<AgentProfile> {
        self.agents
            .iter()
            .map(|p| {
                if p.agent_id == agent_id {
                    p.replicated(factor)
                } else {
                    p.clone()
                }
            })
            .collect()
    }
}

/// Draws a Bernoulli reward for `arm`.
pub fn draw_reward<R: RandomSource + ?Sized>(arm: &RegisteredArm, rng: &mut R) -> u8 {
    u8::from(rng.bernoulli(arm.mean))
}

/// Gap structure of an instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapSummary {
    /// Best mean over all originals.
    pub mu_star: f64,
    /// Δ(a) per registered arm.
    pub per_arm_gap: Vec<f64>,
    /// Δ_i per agent index.
    pub per_agent_gap: Vec<f64>,
    /// μ*_i per agent index.
    pub agent_best: Vec<f64>,
    /// δ_{i,a} per agent index and original (in origin order).
    pub internal_gap: Vec<Vec<f64>>,
    /// Fraction of each agent's registered arms whose mean equals μ*_i.
    pub agent_best_fraction: Vec<f64>,
    /// c: the minimum of `agent_best_fraction`.
    pub best_fraction: f64,
    pub agent_ids: Vec<AgentId>,
}

/// Computes gaps from the registered arms and the underlying originals.
///
/// An agent that hides its best original gets a best fraction of 0.
pub fn summarize_gaps(instance: &Instance) -> GapSummary {
    let agent_best: Vec<f64> = instance
        .agents
        .iter()
        .map(AgentProfile::best_mean)
        .collect();
    let mu_star = agent_best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let per_arm_gap = instance.arms.iter().map(|a| mu_star - a.mean).collect();
    let per_agent_gap = agent_best.iter().map(|b| mu_star - b).collect();
    let internal_gap = instance
        .agents
        .iter()
        .zip(&agent_best)
        .map(|(p, best)| p.originals.iter().map(|o| best - o.mean).collect())
        .collect();
    let agent_best_fraction: Vec<f64> = (0..instance.n_agents())
        .map(|i| {
            let range = instance.agent_arms(i);
            let size = range.len();
            let best = range
                .filter(|&a| instance.arms[a].mean == agent_best[i])
                .count();
            best as f64 / size as f64
        })
        .collect();
    let best_fraction = agent_best_fraction
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    GapSummary {
        mu_star,
        per_arm_gap,
        per_agent_gap,
        agent_best,
        internal_gap,
        agent_best_fraction,
        best_fraction,
        agent_ids: instance.agents.iter().map(|p| p.agent_id).collect(),
    }
}

/// One realized round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Record {
    /// Round index, starting at 1.
    pub t: u64,
    pub arm: ArmId,
    /// Agent index (position in the instance), not the agent id.
    pub agent: usize,
    pub reward: u8,
}

/// The realized sequence of one episode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct History {
    records: Vec<Record>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; rounds must be consecutive from 1 and rewards binary.
    pub fn push(&mut self, record: Record) -> Result<()> {
        if record.t != self.records.len() as u64 + 1 {
            return Err(Error::InvalidParameter(
                "history rounds must increase by one from 1",
            ));
        }
        if record.reward > 1 {
            return Err(Error::NonBinaryReward(record.reward));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::SeededSource;
    use alloc::vec;

    fn fig1() -> Vec<AgentProfile> {
        [0.5, 0.6, 0.7, 0.8, 0.9]
            .iter()
            .enumerate()
            .map(|(i, &m)| AgentProfile::single(i as u32 + 1, m, 1))
            .collect()
    }

    #[test]
    fn five_single_arm_agents() {
        let inst = build_instance(&fig1()).unwrap();
        assert_eq!(inst.n_agents(), 5);
        assert_eq!(inst.arm_count(), 5);
        for (i, arm) in inst.arms().iter().enumerate() {
            assert_eq!(arm.arm_id, i);
            assert_eq!(inst.agent_of(i), i);
        }
    }

    #[test]
    fn replication_expands_copies() {
        let inst = build_instance(&[AgentProfile::single(1, 0.5, 3)]).unwrap();
        assert_eq!(inst.arm_count(), 3);
        assert!(inst.arms().iter().all(|a| a.mean == 0.5));
        let copies: Vec<u32> = inst.arms().iter().map(|a| a.copy_index).collect();
        assert_eq!(copies, vec![1, 2, 3]);
    }

    #[test]
    fn rejects_empty_strategy_and_bad_means() {
        assert_eq!(
            build_instance(&[AgentProfile::single(4, 0.5, 0)]),
            Err(Error::EmptyStrategy { agent_id: 4 })
        );
        assert!(matches!(
            build_instance(&[AgentProfile::single(1, 1.5, 1)]),
            Err(Error::InvalidMean { .. })
        ));
        assert!(matches!(
            build_instance(&[AgentProfile::single(1, f64::NAN, 1)]),
            Err(Error::InvalidMean { .. })
        ));
        assert_eq!(build_instance(&[]), Err(Error::NoAgents));
        assert_eq!(
            build_instance(&[
                AgentProfile::single(2, 0.5, 1),
                AgentProfile::single(2, 0.4, 1)
            ]),
            Err(Error::DuplicateAgent(2))
        );
        assert!(matches!(
            build_instance(&[AgentProfile::new(1, &[0.5, 0.4], &[1])]),
            Err(Error::CopyCountMismatch { .. })
        ));
    }

    #[test]
    fn arm_ids_follow_lexical_order() {
        let profiles = vec![
            AgentProfile::new(7, &[0.1, 0.3], &[1, 2]),
            AgentProfile::single(2, 0.9, 2),
        ];
        let inst = build_instance(&profiles).unwrap();
        let keys: Vec<(u32, u32, u32)> = inst
            .arms()
            .iter()
            .map(|a| (a.agent_id, a.origin_index, a.copy_index))
            .collect();
        assert_eq!(
            keys,
            vec![(2, 1, 1), (2, 1, 2), (7, 1, 1), (7, 2, 1), (7, 2, 2)]
        );
        assert_eq!(inst.agent_arms(1), 2..5);
        assert_eq!(inst.agent_index(7), Some(1));
    }

    #[test]
    fn hidden_originals_register_nothing() {
        let inst = build_instance(&[AgentProfile::new(1, &[0.9, 0.2], &[0, 2])]).unwrap();
        assert_eq!(inst.arm_count(), 2);
        let gaps = summarize_gaps(&inst);
        assert_eq!(gaps.mu_star, 0.9);
        assert_eq!(gaps.best_fraction, 0.0);
    }

    #[test]
    fn gaps_of_fig1_instance() {
        let gaps = summarize_gaps(&build_instance(&fig1()).unwrap());
        assert_eq!(gaps.mu_star, 0.9);
        let expected = [0.4, 0.3, 0.2, 0.1, 0.0];
        for (g, e) in gaps.per_agent_gap.iter().zip(expected) {
            assert!((g - e).abs() < 1e-15);
        }
        assert_eq!(gaps.best_fraction, 1.0);
    }

    #[test]
    fn single_arm_gap_summary() {
        let gaps = summarize_gaps(&build_instance(&[AgentProfile::single(1, 0.3, 1)]).unwrap());
        assert_eq!(gaps.per_arm_gap, vec![0.0]);
        assert_eq!(gaps.best_fraction, 1.0);
    }

    #[test]
    fn partial_replicator_best_fraction() {
        let profiles = vec![
            AgentProfile::new(1, &[0.5, 0.2, 0.1], &[1000, 1000, 1000]),
            AgentProfile::new(2, &[0.9, 0.2, 0.1], &[10, 100, 100]),
        ];
        let gaps = summarize_gaps(&build_instance(&profiles).unwrap());
        assert_eq!(gaps.agent_best_fraction[1], 10.0 / 210.0);
        assert_eq!(gaps.best_fraction, 10.0 / 210.0);
        assert_eq!(gaps.agent_best_fraction[0], 1.0 / 3.0);
        assert!((gaps.internal_gap[1][1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn degenerate_rewards() {
        let mut rng = SeededSource::new(3);
        let one = RegisteredArm {
            arm_id: 0,
            agent_id: 1,
            origin_index: 1,
            copy_index: 1,
            mean: 1.0,
        };
        let zero = RegisteredArm {
            mean: 0.0,
            ..one.clone()
        };
        for _ in 0..10_000 {
            assert_eq!(draw_reward(&one, &mut rng), 1);
            assert_eq!(draw_reward(&zero, &mut rng), 0);
        }
    }

    #[test]
    fn fair_coin_concentrates() {
        // Binomial(1e6, 0.5): sigma of the mean is 5e-4, so 3 sigma is 0.0015 < 0.002.
        let mut rng = SeededSource::new(11);
        let arm = RegisteredArm {
            arm_id: 0,
            agent_id: 1,
            origin_index: 1,
            copy_index: 1,
            mean: 0.5,
        };
        let n = 1_000_000u32;
        let ones: u32 = (0..n).map(|_| u32::from(draw_reward(&arm, &mut rng))).sum();
        let mean = f64::from(ones) / f64::from(n);
        assert!((mean - 0.5).abs() <= 0.002, "{mean}");
    }

    #[test]
    fn history_enforces_consecutive_rounds() {
        let mut h = History::new();
        h.push(Record {
            t: 1,
            arm: 0,
            agent: 0,
            reward: 1,
        })
        .unwrap();
        assert!(h
            .push(Record {
                t: 3,
                arm: 0,
                agent: 0,
                reward: 1
            })
            .is_err());
        assert!(h
            .push(Record {
                t: 2,
                arm: 0,
                agent: 0,
                reward: 2
            })
            .is_err());
        assert_eq!(h.len(), 1);
    }
}
