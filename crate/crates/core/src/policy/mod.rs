//! Selection policies behind a uniform select/update interface.
//!
//! | kind     | agent level                         | arm level                     |
//! |----------|-------------------------------------|-------------------------------|
//! | `Ucb1`   | none                                | UCB1 over all arms            |
//! | `Fair`   | uniform draw                        | UCB1 over `S_i`               |
//! | `SUcb`   | none                                | UCB1 over a global subsample  |
//! | `HUcb`   | `R + sqrt(2 ln t / N)`              | UCB1 over `S_i`, clock `N(i)` |
//! | `RhUcb`  | `R + sqrt(sqrt(t) ln t / N)`        | UCB1 over fixed `B_i`         |
//! | `PrhUcb` | `R + sqrt(sqrt(t ln^3 t) / N)`      | UCB1 over growing `B_i`       |
//!
//! Unexplored agents and arms are always tried first, picked uniformly. Ties
//! (within [`index::TIE_TOLERANCE`]) are broken uniformly unless the config
//! asks for [`TieBreak::Lowest`].

mod index;
mod pool;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use index::{
    hucb_agent_index, ln_clock, prhucb_agent_index, rhucb_agent_index, ucb1_index, TIE_TOLERANCE,
};
use pool::ArmPool;

use crate::error::{Error, Result};
use crate::model::{draw_reward, ArmId, Instance, Record};
use crate::random::{choose, sample_without_replacement, RandomSource, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PolicyKind {
    Ucb1,
    Fair,
    SUcb,
    HUcb,
    RhUcb,
    PrhUcb,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Ucb1,
        PolicyKind::Fair,
        PolicyKind::SUcb,
        PolicyKind::HUcb,
        PolicyKind::RhUcb,
        PolicyKind::PrhUcb,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::Fair => "fair",
            PolicyKind::SUcb => "sucb",
            PolicyKind::HUcb => "hucb",
            PolicyKind::RhUcb => "rhucb",
            PolicyKind::PrhUcb => "prhucb",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            PolicyKind::Ucb1 => "UCB1",
            PolicyKind::Fair => "Fair(UCB1)",
            PolicyKind::SUcb => "S-UCB",
            PolicyKind::HUcb => "H-UCB",
            PolicyKind::RhUcb => "RH-UCB",
            PolicyKind::PrhUcb => "PRH-UCB",
        }
    }

    /// Whether the policy picks an agent before picking an arm.
    pub fn is_two_level(self) -> bool {
        !matches!(self, PolicyKind::Ucb1 | PolicyKind::SUcb)
    }

    pub fn is_hierarchical(self) -> bool {
        matches!(
            self,
            PolicyKind::HUcb | PolicyKind::RhUcb | PolicyKind::PrhUcb
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidParameter("unknown policy"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TieBreak {
    #[default]
    Uniform,
    /// Smallest arm id / agent index wins. Only for demonstrating what
    /// deterministic tie-breaking does to the exact certificates.
    Lowest,
}

/// Which clock the inner UCB1 of Fair(UCB1) uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FairClock {
    /// The selected agent's own count `N(i) + 1`.
    #[default]
    Local,
    /// The global round `t`.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Horizon T, used by the subsample sizes of S-UCB and RH-UCB and as the
    /// episode length by [`run_episode`].
    pub horizon: u64,
    /// RH-UCB subsample ratio L.
    pub robust_ratio: f64,
    /// S-UCB subsample ratio l.
    pub sample_ratio: f64,
    pub fair_clock: FairClock,
    pub tie_break: TieBreak,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind, horizon: u64) -> Self {
        Self {
            kind,
            horizon,
            robust_ratio: 1.0,
            sample_ratio: 1.0,
            fair_clock: FairClock::Local,
            tie_break: TieBreak::Uniform,
        }
    }

    pub fn with_robust_ratio(mut self, l: f64) -> Self {
        self.robust_ratio = l;
        self
    }

    pub fn with_sample_ratio(mut self, l: f64) -> Self {
        self.sample_ratio = l;
        self
    }

    pub fn with_tie_break(mut self, tie: TieBreak) -> Self {
        self.tie_break = tie;
        self
    }

    pub fn with_fair_clock(mut self, clock: FairClock) -> Self {
        self.fair_clock = clock;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1"));
        }
        if !(self.robust_ratio > 0.0 && self.robust_ratio.is_finite()) {
            return Err(Error::InvalidParameter("L must be a positive real"));
        }
        if !(self.sample_ratio > 0.0 && self.sample_ratio.is_finite()) {
            return Err(Error::InvalidParameter("l must be a positive real"));
        }
        if self.kind == PolicyKind::RhUcb && self.horizon < 2 {
            return Err(Error::InvalidParameter(
                "RH-UCB needs a horizon of at least 2",
            ));
        }
        Ok(())
    }
}

/// Per-arm sufficient statistics `(n(a), r(a))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArmStats {
    pub count: u64,
    pub mean: f64,
}

/// Per-agent sufficient statistics `(N(i), R(i))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentStats {
    pub count: u64,
    pub mean: f64,
}

impl ArmStats {
    fn observe(&mut self, reward: f64) {
        self.mean = (self.mean * self.count as f64 + reward) / (self.count as f64 + 1.0);
        self.count += 1;
    }
}

impl AgentStats {
    fn observe(&mut self, reward: f64) {
        self.mean = (self.mean * self.count as f64 + reward) / (self.count as f64 + 1.0);
        self.count += 1;
    }
}

/// The outcome of one `select` call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub arm: ArmId,
    /// Agent index owning `arm`.
    pub agent: usize,
}

/// `min(available, ceil(ratio ln T))`, and at least one.
pub fn subsample_size(available: usize, ratio: f64, horizon: u64) -> usize {
    let target = libm::ceil(ratio * ln_clock(horizon as f64));
    let target = if target < 1.0 { 1 } else { target as usize };
    available.min(target)
}

/// S-UCB's global subsample: `min(|S|, ceil(l ln T))` arms drawn uniformly
/// without replacement from every registered arm.
pub fn sucb_init<R: RandomSource + ?Sized>(
    instance: &Instance,
    ratio: f64,
    horizon: u64,
    rng: &mut R,
) -> Vec<ArmId> {
    let all: Vec<ArmId> = (0..instance.arm_count()).collect();
    let k = subsample_size(all.len(), ratio, horizon);
    sample_without_replacement(&all, k, Stream::Arm, rng)
}

/// RH-UCB's per-agent subsamples `B_i` of size `min(|S_i|, ceil(L ln T))`.
pub fn rhucb_init<R: RandomSource + ?Sized>(
    instance: &Instance,
    ratio: f64,
    horizon: u64,
    rng: &mut R,
) -> Vec<Vec<ArmId>> {
    (0..instance.n_agents())
        .map(|i| {
            let arms: Vec<ArmId> = instance.agent_arms(i).collect();
            let k = subsample_size(arms.len(), ratio, horizon);
            sample_without_replacement(&arms, k, Stream::Arm, rng)
        })
        .collect()
}

const NOT_POOLED: usize = usize::MAX;

/// Mutable state of one policy over one instance.
#[derive(Debug, Clone)]
pub struct Policy {
    config: PolicyConfig,
    round: u64,
    arms: Vec<ArmStats>,
    agents: Vec<AgentStats>,
    arm_agent: Vec<usize>,
    /// Arm id -> (pool, local index), or `NOT_POOLED`.
    arm_pool: Vec<(usize, usize)>,
    pools: Vec<ArmPool>,
    /// PRH-UCB arms of each agent not yet admitted to `B_i`.
    reserve: Vec<Vec<ArmId>>,
    agent_sizes: Vec<usize>,
    pending: Option<Selection>,
}

impl Policy {
    /// Initializes statistics and, for S-UCB and RH-UCB, draws the subsamples.
    pub fn new<R: RandomSource + ?Sized>(
        instance: &Instance,
        config: PolicyConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let n = instance.n_agents();
        let arm_agent: Vec<usize> = (0..instance.arm_count())
            .map(|a| instance.agent_of(a))
            .collect();
        let mut policy = Self {
            arms: vec![ArmStats::default(); instance.arm_count()],
            agents: vec![AgentStats::default(); n],
            arm_agent,
            arm_pool: vec![(NOT_POOLED, NOT_POOLED); instance.arm_count()],
            pools: Vec::new(),
            reserve: Vec::new(),
            agent_sizes: (0..n).map(|i| instance.agent_arms(i).len()).collect(),
            pending: None,
            round: 0,
            config,
        };

        let groups: Vec<Vec<ArmId>> = match policy.config.kind {
            PolicyKind::Ucb1 => vec![(0..instance.arm_count()).collect()],
            PolicyKind::SUcb => vec![sucb_init(
                instance,
                policy.config.sample_ratio,
                policy.config.horizon,
                rng,
            )],
            PolicyKind::Fair | PolicyKind::HUcb => {
                (0..n).map(|i| instance.agent_arms(i).collect()).collect()
            }
            PolicyKind::RhUcb => rhucb_init(
                instance,
                policy.config.robust_ratio,
                policy.config.horizon,
                rng,
            ),
            PolicyKind::PrhUcb => {
                policy.reserve = (0..n).map(|i| instance.agent_arms(i).collect()).collect();
                vec![Vec::new(); n]
            }
        };
        for group in groups {
            let id = policy.pools.len();
            let mut pool = ArmPool::new();
            for arm in group {
                policy.arm_pool[arm] = (id, pool.insert(arm));
            }
            policy.pools.push(pool);
        }
        Ok(policy)
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn kind(&self) -> PolicyKind {
        self.config.kind
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn arm_stats(&self, arm: ArmId) -> ArmStats {
        self.arms[arm]
    }

    pub fn agent_stats(&self, agent: usize) -> AgentStats {
        self.agents[agent]
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    /// The arms the arm-level UCB of `agent` ranges over: `B_i` for the
    /// robust variants, `S_i` for Fair and H-UCB. For the flat policies, the
    /// pooled arms owned by `agent`.
    pub fn candidate_arms(&self, agent: usize) -> Vec<ArmId> {
        if self.config.kind.is_two_level() {
            self.pools[agent].members().to_vec()
        } else {
            self.pools[0]
                .members()
                .iter()
                .copied()
                .filter(|&a| self.arm_agent[a] == agent)
                .collect()
        }
    }

    /// S-UCB's sampled set (or all arms for UCB1).
    pub fn global_arms(&self) -> Option<&[ArmId]> {
        (!self.config.kind.is_two_level()).then(|| self.pools[0].members())
    }

    /// Current subsample size `|B_i|` of a PRH-UCB or RH-UCB agent.
    pub fn subsample_len(&self, agent: usize) -> usize {
        if self.config.kind.is_two_level() {
            self.pools[agent].len()
        } else {
            self.candidate_arms(agent).len()
        }
    }

    pub fn select<R: RandomSource + ?Sized>(&mut self, rng: &mut R) -> Result<Selection> {
        if self.pending.is_some() {
            return Err(Error::PendingSelection);
        }
        let t = self.round + 1;
        let tie = self.config.tie_break;
        let arm = match self.config.kind {
            PolicyKind::Ucb1 | PolicyKind::SUcb => {
                let local = self.pools[0].select(ln_clock(t as f64), tie, rng);
                self.pools[0].member(local)
            }
            PolicyKind::Fair => {
                let agent = choose(rng, Stream::Agent, self.agents.len());
                let clock = match self.config.fair_clock {
                    FairClock::Local => self.agents[agent].count + 1,
                    FairClock::Global => t,
                };
                let local = self.pools[agent].select(ln_clock(clock as f64), tie, rng);
                self.pools[agent].member(local)
            }
            PolicyKind::HUcb | PolicyKind::RhUcb => {
                let agent = self.select_agent(t, rng);
                self.select_within(agent, rng)
            }
            PolicyKind::PrhUcb => {
                let agent = self.select_agent(t, rng);
                let admitted = self.pools[agent].len();
                let ln_t = ln_clock(t as f64);
                let cap = (self.agent_sizes[agent] as f64).min(ln_t * ln_t);
                if admitted == 0 || (admitted as f64) < cap {
                    let reserve = &mut self.reserve[agent];
                    let k = match tie {
                        TieBreak::Uniform => choose(rng, Stream::Arm, reserve.len()),
                        TieBreak::Lowest => (0..reserve.len())
                            .min_by_key(|&k| reserve[k])
                            .expect("reserve is non-empty while below |S_i|"),
                    };
                    let arm = reserve.swap_remove(k);
                    self.arm_pool[arm] = (agent, self.pools[agent].insert(arm));
                    arm
                } else {
                    self.select_within(agent, rng)
                }
            }
        };
        let selection = Selection {
            arm,
            agent: self.arm_agent[arm],
        };
        self.pending = Some(selection);
        Ok(selection)
    }

    /// Phase 1 of the hierarchical policies.
    fn select_agent<R: RandomSource + ?Sized>(&self, t: u64, rng: &mut R) -> usize {
        let tie = self.config.tie_break;
        let unexplored: Vec<usize> = (0..self.agents.len())
            .filter(|&i| self.agents[i].count == 0)
            .collect();
        if !unexplored.is_empty() {
            return match tie {
                TieBreak::Uniform => unexplored[choose(rng, Stream::Agent, unexplored.len())],
                TieBreak::Lowest => unexplored[0],
            };
        }
        let index = match self.config.kind {
            PolicyKind::HUcb => hucb_agent_index,
            PolicyKind::RhUcb => rhucb_agent_index,
            PolicyKind::PrhUcb => prhucb_agent_index,
            _ => unreachable!("phase 1 only runs for hierarchical policies"),
        };
        let values: Vec<f64> = self.agents.iter().map(|s| index(s, t)).collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = (0..values.len())
            .filter(|&i| values[i] >= best - TIE_TOLERANCE)
            .collect();
        match tie {
            TieBreak::Uniform => tied[choose(rng, Stream::Agent, tied.len())],
            TieBreak::Lowest => tied[0],
        }
    }

    /// Phase 2: UCB1 inside the agent's pool, clocked by `N(i)` before this
    /// round's update.
    fn select_within<R: RandomSource + ?Sized>(&self, agent: usize, rng: &mut R) -> ArmId {
        let clock = self.agents[agent].count as f64;
        let local = self.pools[agent].select(ln_clock(clock), self.config.tie_break, rng);
        self.pools[agent].member(local)
    }

    /// Feeds back the reward of the pending selection.
    pub fn update(&mut self, arm: ArmId, reward: u8) -> Result<()> {
        let pending = self.pending.ok_or(Error::StaleUpdate)?;
        if pending.arm != arm {
            return Err(Error::WrongArm {
                expected: pending.arm,
                got: arm,
            });
        }
        if reward > 1 {
            return Err(Error::NonBinaryReward(reward));
        }
        self.pending = None;
        let r = f64::from(reward);
        self.arms[arm].observe(r);
        self.agents[pending.agent].observe(r);
        let (pool, local) = self.arm_pool[arm];
        if pool != NOT_POOLED {
            self.pools[pool].record(local, reward);
        }
        self.round += 1;
        Ok(())
    }
}

/// Runs `config.horizon` rounds of `config.kind` on `instance`, reporting each
/// round to `observe`, and returns the final policy state.
pub fn run_episode<R, F>(
    instance: &Instance,
    config: &PolicyConfig,
    rng: &mut R,
    mut observe: F,
) -> Result<Policy>
where
    R: RandomSource + ?Sized,
    F: FnMut(&Record),
{
    let mut policy = Policy::new(instance, config.clone(), rng)?;
    for t in 1..=config.horizon {
        let sel = policy.select(rng)?;
        let reward = draw_reward(&instance.arms()[sel.arm], rng);
        policy.update(sel.arm, reward)?;
        observe(&Record {
            t,
            arm: sel.arm,
            agent: sel.agent,
            reward,
        });
    }
    Ok(policy)
}

/// [`run_episode`], collecting the full history.
pub fn simulate_history<R: RandomSource + ?Sized>(
    instance: &Instance,
    config: &PolicyConfig,
    rng: &mut R,
) -> Result<(Policy, crate::model::History)> {
    let mut history = crate::model::History::new();
    let mut err = None;
    let policy = run_episode(instance, config, rng, |rec| {
        if let Err(e) = history.push(*rec) {
            err.get_or_insert(e);
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok((policy, history)),
    }
}

#[cfg(test)]
mod tests;
