//! Exact selection-count distributions for short horizons.
//!
//! Every policy decision is a deterministic function of the history and of
//! two kinds of random draws: uniform choices (initialization, ties,
//! subsampling, Fair's agent draw) and Bernoulli rewards. The enumerator
//! replays the real policy code against a scripted [`RandomSource`] and walks
//! every combination of draw outcomes depth-first, weighting each path by the
//! product of its outcome probabilities. Zero-probability reward outcomes are
//! not branched on.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{build_instance, AgentId, Instance};
use crate::policy::{Policy, PolicyConfig, PolicyKind};
use crate::random::{RandomSource, Stream};

/// Longest horizon the enumerator accepts.
pub const MAX_HORIZON: u64 = 6;
/// Largest admissible path-count bound.
pub const MAX_PATHS: f64 = 1e7;
/// Absolute CDF tolerance for equality and dominance.
pub const CDF_TOLERANCE: f64 = 1e-9;

/// Distribution of a t-count: `probs[k] = P[N = k]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExactDistribution {
    probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn from_probs(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// Point mass at `value`.
    pub fn point(value: usize) -> Self {
        let mut probs = vec![0.0; value + 1];
        probs[value] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, value: usize) -> f64 {
        self.probs.get(value).copied().unwrap_or(0.0)
    }

    /// `(value, probability)` pairs with positive mass.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > 0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// `P[N <= x]`.
    pub fn cdf(&self, x: usize) -> f64 {
        self.probs.iter().take(x + 1).sum()
    }

    /// Largest absolute CDF difference against `other`.
    pub fn max_cdf_gap(&self, other: &Self) -> f64 {
        let top = self.probs.len().max(other.probs.len());
        (0..top)
            .map(|x| libm::fabs(self.cdf(x) - other.cdf(x)))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_cdf_gap(other) <= tol
    }
}

/// Outcome of comparing `a` against `b` in first-order stochastic dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Dominance {
    /// `P[a <= x] <= P[b <= x]` everywhere and strictly somewhere.
    StrictlyDominates,
    /// `P[a <= x] <= P[b <= x]` everywhere, with equality throughout.
    Dominates,
    Incomparable,
}

/// Compares the CDFs of `a` and `b` up to [`CDF_TOLERANCE`].
pub fn dominance_check(a: &ExactDistribution, b: &ExactDistribution) -> Dominance {
    let top = a.probs.len().max(b.probs.len());
    let mut strict = false;
    for x in 0..top {
        let (fa, fb) = (a.cdf(x), b.cdf(x));
        if fa > fb + CDF_TOLERANCE {
            return Dominance::Incomparable;
        }
        if fa < fb - CDF_TOLERANCE {
            strict = true;
        }
    }
    if strict {
        Dominance::StrictlyDominates
    } else {
        Dominance::Dominates
    }
}

/// Exact t-count distributions of every agent for `t = 1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExactTable {
    pub horizon: u64,
    pub agent_ids: Vec<AgentId>,
    /// `counts[agent][t - 1]`.
    pub counts: Vec<Vec<ExactDistribution>>,
    pub paths: u64,
}

impl ExactTable {
    pub fn distribution(&self, agent: usize, t: u64) -> &ExactDistribution {
        &self.counts[agent][(t - 1) as usize]
    }
}

/// `(2 b)^t` with `b` the largest number of options in one round: the arm
/// count, times the agent count for policies that also choose an agent.
pub fn path_bound(instance: &Instance, kind: PolicyKind, horizon: u64) -> f64 {
    let mut branching = instance.arm_count() as f64;
    if kind.is_two_level() {
        branching *= instance.n_agents() as f64;
    }
    libm::pow(2.0 * branching, horizon as f64)
}

#[derive(Debug, Default)]
struct ScriptedSource {
    script: Vec<u32>,
    arity: Vec<u32>,
    cursor: usize,
    weight: f64,
}

impl ScriptedSource {
    fn rewind(&mut self) {
        self.cursor = 0;
        self.weight = 1.0;
    }

    fn branch(&mut self, arity: u32) -> u32 {
        let c = self.cursor;
        self.cursor += 1;
        if c < self.script.len() {
            debug_assert_eq!(self.arity[c], arity, "replayed prefix diverged");
            self.script[c]
        } else {
            self.script.push(0);
            self.arity.push(arity);
            0
        }
    }

    /// Moves to the next path; `false` once every path has been visited.
    fn advance(&mut self) -> bool {
        self.script.truncate(self.cursor);
        self.arity.truncate(self.cursor);
        while let (Some(last), Some(&arity)) = (self.script.last_mut(), self.arity.last()) {
            if *last + 1 < arity {
                *last += 1;
                return true;
            }
            self.script.pop();
            self.arity.pop();
        }
        false
    }
}

impl RandomSource for ScriptedSource {
    fn pick(&mut self, _stream: Stream, len: usize) -> usize {
        let k = self.branch(len as u32);
        self.weight /= len as f64;
        k as usize
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        // Branch 0 is a success.
        if self.branch(2) == 0 {
            self.weight *= p;
            true
        } else {
            self.weight *= 1.0 - p;
            false
        }
    }
}

/// Enumerates every path of `config.kind` on `instance` up to `horizon`
/// rounds. `config.horizon` is left as given so the subsample sizes can be
/// chosen independently of the enumeration depth.
pub fn enumerate_exact(
    instance: &Instance,
    config: &PolicyConfig,
    horizon: u64,
) -> Result<ExactTable> {
    if horizon == 0 {
        return Err(Error::InvalidParameter(
            "enumeration horizon must be at least 1",
        ));
    }
    if horizon > MAX_HORIZON {
        return Err(Error::TooLarge {
            reason: "horizon exceeds the enumeration cap",
            bound: horizon as f64,
        });
    }
    let bound = path_bound(instance, config.kind, horizon);
    if bound > MAX_PATHS {
        return Err(Error::TooLarge {
            reason: "path bound exceeds the enumeration guard",
            bound,
        });
    }
    config.validate()?;

    let n = instance.n_agents();
    let h = horizon as usize;
    let mut counts: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| (1..=h).map(|t| vec![0.0; t + 1]).collect())
        .collect();
    let episode = PolicyConfig {
        horizon,
        ..config.clone()
    };
    // Subsample sizes follow the configured horizon, the episode length the
    // enumeration depth.
    let init = config.clone();

    let mut src = ScriptedSource::default();
    let mut sequence = Vec::with_capacity(h);
    let mut paths = 0u64;
    loop {
        src.rewind();
        sequence.clear();
        let mut policy = Policy::new(instance, init.clone(), &mut src)?;
        for _ in 0..episode.horizon {
            let sel = policy.select(&mut src)?;
            let reward = crate::model::draw_reward(&instance.arms()[sel.arm], &mut src);
            policy.update(sel.arm, reward)?;
            sequence.push(sel.agent);
        }
        let w = src.weight;
        let mut running = vec![0usize; n];
        for (t, &agent) in sequence.iter().enumerate() {
            running[agent] += 1;
            for (i, c) in running.iter().enumerate() {
                counts[i][t][*c] += w;
            }
        }
        paths += 1;
        if paths as f64 > MAX_PATHS {
            return Err(Error::TooLarge {
                reason: "path count exceeds the enumeration guard",
                bound: paths as f64,
            });
        }
        if !src.advance() {
            break;
        }
    }

    Ok(ExactTable {
        horizon,
        agent_ids: (0..n).map(|i| instance.agent_id(i)).collect(),
        counts: counts
            .into_iter()
            .map(|per_t| {
                per_t
                    .into_iter()
                    .map(ExactDistribution::from_probs)
                    .collect()
            })
            .collect(),
        paths,
    })
}

/// Comparison of one agent's t-count with and without duplicating its whole
/// strategy, at one round.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoundComparison {
    pub t: u64,
    pub replicated_vs_original: Dominance,
    pub original_vs_replicated: Dominance,
    pub max_cdf_gap: f64,
    pub original_mean: f64,
    pub replicated_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    /// Duplicating weakly dominates at every round and strictly at some round.
    Prone,
    /// Distributions agree at every round.
    Equal,
    /// Not duplicating weakly dominates at every round, strictly somewhere.
    Proof,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentCertificate {
    pub agent_id: AgentId,
    pub rounds: Vec<RoundComparison>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub policy: PolicyKind,
    pub horizon: u64,
    pub agents: Vec<AgentCertificate>,
    pub paths: u64,
}

impl Certificate {
    /// Every agent gains strictly by duplicating.
    pub fn shows_proneness(&self) -> bool {
        self.agents.iter().all(|a| a.verdict == Verdict::Prone)
    }

    /// Duplicating changes no agent's count distribution.
    pub fn shows_equality(&self) -> bool {
        self.agents.iter().all(|a| a.verdict == Verdict::Equal)
    }

    /// No agent gains by duplicating.
    pub fn shows_proofness(&self) -> bool {
        self.agents
            .iter()
            .all(|a| matches!(a.verdict, Verdict::Equal | Verdict::Proof))
    }
}

/// For each agent, duplicates every arm it registers, enumerates both
/// instances and compares that agent's t-count distributions round by round.
pub fn proneness_certificate(
    instance: &Instance,
    config: &PolicyConfig,
    horizon: u64,
) -> Result<Certificate> {
    let base = enumerate_exact(instance, config, horizon)?;
    let mut paths = base.paths;
    let mut agents = Vec::with_capacity(instance.n_agents());
    for i in 0..instance.n_agents() {
        let id = instance.agent_id(i);
        let doubled = build_instance(&instance.profiles_with_replication(id, 2))?;
        let dup = enumerate_exact(&doubled, config, horizon)?;
        paths += dup.paths;
        let j = doubled.agent_index(id).expect("same agent ids");
        let rounds: Vec<RoundComparison> = (1..=horizon)
            .map(|t| {
                let orig = base.distribution(i, t);
                let rep = dup.distribution(j, t);
                RoundComparison {
                    t,
                    replicated_vs_original: dominance_check(rep, orig),
                    original_vs_replicated: dominance_check(orig, rep),
                    max_cdf_gap: rep.max_cdf_gap(orig),
                    original_mean: orig.mean(),
                    replicated_mean: rep.mean(),
                }
            })
            .collect();
        let all = |f: &dyn Fn(&RoundComparison) -> bool| rounds.iter().all(f);
        let any = |f: &dyn Fn(&RoundComparison) -> bool| rounds.iter().any(f);
        let verdict = if all(&|r| r.max_cdf_gap <= CDF_TOLERANCE) {
            Verdict::Equal
        } else if all(&|r| r.replicated_vs_original != Dominance::Incomparable)
            && any(&|r| r.replicated_vs_original == Dominance::StrictlyDominates)
        {
            Verdict::Prone
        } else if all(&|r| r.original_vs_replicated != Dominance::Incomparable) {
            Verdict::Proof
        } else {
            Verdict::Inconclusive
        };
        agents.push(AgentCertificate {
            agent_id: id,
            rounds,
            verdict,
        });
    }
    Ok(Certificate {
        policy: config.kind,
        horizon,
        agents,
        paths,
    })
}
