//! Seeded repetitions, aggregation and sweeps.

use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use repbandit_core::metrics::{
    expected_utility, mean_std, DiscountSequence, RunRecorder, RunResult, UtilityEstimate,
};
use repbandit_core::model::AgentId;
use repbandit_core::{
    run_episode as run_policy, summarize_gaps, GapSummary, Instance, PolicyConfig,
};
use repbandit_core::{PolicyKind, SeededSource};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ScenarioConfig};
use crate::seeds::episode_seed;

/// Build identifier recorded in result sidecars.
pub const BUILD: &str = env!("REPBANDIT_BUILD");

/// A validated scenario with everything an episode needs precomputed.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ScenarioConfig,
    pub instance: Instance,
    pub gaps: GapSummary,
    pub policy: PolicyConfig,
    pub discount: DiscountSequence,
}

impl Experiment {
    pub fn new(config: ScenarioConfig) -> Result<Self, ConfigError> {
        let instance = config.validate()?;
        let gaps = summarize_gaps(&instance);
        let policy = config.policy.resolve(&instance, config.horizon);
        let discount = config
            .discount
            .sequence(config.horizon, instance.n_agents())?;
        Ok(Self {
            config,
            instance,
            gaps,
            policy,
            discount,
        })
    }

    pub fn seed(&self, rep: u32) -> u64 {
        let tag = (!self.config.coupled).then(|| self.policy.kind.tag());
        episode_seed(self.config.base_seed, u64::from(rep), tag)
    }

    pub fn run_episode(&self, rep: u32) -> Result<RunResult, ConfigError> {
        let seed = self.seed(rep);
        let mut recorder = RunRecorder::new(
            &self.instance,
            &self.gaps,
            &self.discount,
            self.config.horizon,
            seed,
        )?;
        let mut rng = SeededSource::new(seed);
        run_policy(&self.instance, &self.policy, &mut rng, |r| {
            recorder.observe(r)
        })?;
        Ok(recorder.finish())
    }

    /// Runs every repetition (in parallel) and aggregates them.
    pub fn run(&self) -> Result<AggregateResult, ConfigError> {
        let start = Instant::now();
        let reps: Vec<u32> = (0..self.config.repetitions).collect();
        let runs = pool().install(|| {
            reps.par_iter()
                .map(|&rep| self.run_episode(rep))
                .collect::<Result<Vec<_>, _>>()
        })?;
        Ok(self.aggregate(&runs, start.elapsed().as_secs_f64()))
    }

    pub fn aggregate(&self, runs: &[RunResult], wall_clock_secs: f64) -> AggregateResult {
        let checkpoints = runs[0].checkpoints.clone();
        let n = self.instance.n_agents();
        let column = |k: usize| -> (f64, f64) {
            let v: Vec<f64> = runs.iter().map(|r| r.regret[k]).collect();
            spread(&v)
        };
        let (mean_regret, std_regret): (Vec<f64>, Vec<f64>) =
            (0..checkpoints.len()).map(column).unzip();
        let mut revenue_mean = Vec::with_capacity(checkpoints.len());
        let mut revenue_std = Vec::with_capacity(checkpoints.len());
        for k in 0..checkpoints.len() {
            let (m, s): (Vec<f64>, Vec<f64>) = (0..n)
                .map(|i| spread(&runs.iter().map(|r| r.revenue[k][i]).collect::<Vec<_>>()))
                .unzip();
            revenue_mean.push(m);
            revenue_std.push(s);
        }
        AggregateResult {
            scenario: self.config.name.clone(),
            label: self.policy.kind.tag().to_string(),
            policy: self.policy.kind,
            policy_config: self.policy.clone(),
            config: self.config.clone(),
            agent_ids: self.gaps.agent_ids.clone(),
            checkpoints,
            mean_regret,
            std_regret,
            revenue_mean,
            revenue_std,
            final_regret: runs.iter().map(|r| r.final_regret).collect(),
            final_revenue: runs.iter().map(|r| r.agent_revenue.clone()).collect(),
            final_counts: runs.iter().map(|r| r.final_counts().to_vec()).collect(),
            utility: (0..n)
                .map(|i| expected_utility(runs, i, &self.config.utility))
                .collect(),
            seeds: runs.iter().map(|r| r.seed).collect(),
            wall_clock_secs,
            build: BUILD.to_string(),
        }
    }
}

fn spread(values: &[f64]) -> (f64, f64) {
    let (m, s) = mean_std(values);
    (m, if s.is_nan() { 0.0 } else { s })
}

/// Worker pool sized by `SB_THREADS` when set, otherwise rayon's default.
fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var("SB_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

/// One episode of `config`, independent of any batch it may belong to.
pub fn run_episode(config: &ScenarioConfig, rep: u32) -> Result<RunResult, ConfigError> {
    Experiment::new(config.clone())?.run_episode(rep)
}

pub fn run_experiment(config: &ScenarioConfig) -> Result<AggregateResult, ConfigError> {
    Experiment::new(config.clone())?.run()
}

/// Mean/σ summaries over repetitions of one scenario under one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub scenario: String,
    /// File-name label: the policy tag, plus the axis value in sweeps.
    pub label: String,
    pub policy: PolicyKind,
    pub policy_config: PolicyConfig,
    pub config: ScenarioConfig,
    pub agent_ids: Vec<AgentId>,
    pub checkpoints: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub std_regret: Vec<f64>,
    /// `[checkpoint][agent]`.
    pub revenue_mean: Vec<Vec<f64>>,
    pub revenue_std: Vec<Vec<f64>>,
    /// Per repetition.
    pub final_regret: Vec<f64>,
    /// `[repetition][agent]`.
    pub final_revenue: Vec<Vec<f64>>,
    pub final_counts: Vec<Vec<u64>>,
    pub utility: Vec<UtilityEstimate>,
    pub seeds: Vec<u64>,
    pub wall_clock_secs: f64,
    pub build: String,
}

impl AggregateResult {
    pub fn repetitions(&self) -> usize {
        self.final_regret.len()
    }

    pub fn horizon(&self) -> u64 {
        *self.checkpoints.last().expect("non-empty trajectory")
    }

    pub fn final_mean_regret(&self) -> f64 {
        *self.mean_regret.last().expect("non-empty trajectory")
    }

    pub fn final_std_regret(&self) -> f64 {
        *self.std_regret.last().expect("non-empty trajectory")
    }

    /// Standard error of the final mean regret.
    pub fn regret_std_error(&self) -> f64 {
        self.final_std_regret() / (self.repetitions() as f64).sqrt()
    }

    pub fn agent_index(&self, agent_id: AgentId) -> Option<usize> {
        self.agent_ids.iter().position(|&a| a == agent_id)
    }

    /// Mean, σ and standard error of an agent's final revenue.
    pub fn revenue(&self, agent_id: AgentId) -> Option<(f64, f64, f64)> {
        let i = self.agent_index(agent_id)?;
        let values: Vec<f64> = self.final_revenue.iter().map(|r| r[i]).collect();
        let (m, s) = spread(&values);
        Some((m, s, s / (values.len() as f64).sqrt()))
    }

    /// Mean regret at the last checkpoint not after `t`.
    pub fn mean_regret_at(&self, t: u64) -> f64 {
        let k = self.checkpoints.partition_point(|&c| c <= t).max(1) - 1;
        self.mean_regret[k]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Copy counts applied to every original of one agent.
    Replicas {
        agent_id: AgentId,
        counts: Vec<u32>,
    },
    Policies(Vec<PolicyKind>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Replicas { counts, .. } => counts.len(),
            SweepAxis::Policies(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One aggregate per axis point. Every point reuses the scenario's base seed,
/// so replica sweeps compare the same repetitions point by point.
pub fn sweep(
    config: &ScenarioConfig,
    axis: &SweepAxis,
) -> Result<Vec<AggregateResult>, ConfigError> {
    if axis.is_empty() {
        return Err(ConfigError::Invalid("sweep axis is empty".into()));
    }
    match axis {
        SweepAxis::Replicas { agent_id, counts } => counts
            .iter()
            .map(|&k| {
                let cfg = config.clone().with_replicas(*agent_id, k)?;
                let mut result = run_experiment(&cfg)?;
                result.label = format!("{}_k{k}", result.label);
                Ok(result)
            })
            .collect(),
        SweepAxis::Policies(kinds) => kinds
            .iter()
            .map(|&kind| run_experiment(&config.clone().with_policy(kind)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn small() -> ScenarioConfig {
        presets::fig1(3).with_horizon(500).with_repetitions(8)
    }

    #[test]
    fn episodes_reproduce_in_isolation() {
        let cfg = small().with_policy(PolicyKind::RhUcb);
        let agg = run_experiment(&cfg).unwrap();
        for rep in [0u32, 5] {
            let solo = run_episode(&cfg, rep).unwrap();
            assert_eq!(solo.seed, agg.seeds[rep as usize]);
            assert_eq!(solo.final_regret, agg.final_regret[rep as usize]);
            assert_eq!(solo.agent_revenue, agg.final_revenue[rep as usize]);
        }
    }

    #[test]
    fn single_repetition_has_zero_spread() {
        let agg = run_experiment(&small().with_repetitions(1)).unwrap();
        assert!(agg.std_regret.iter().all(|&s| s == 0.0));
        assert!(agg.revenue_std.iter().flatten().all(|&s| s == 0.0));
    }

    #[test]
    fn aggregate_mean_matches_finals() {
        let agg = run_experiment(&small()).unwrap();
        let direct = agg.final_regret.iter().sum::<f64>() / agg.repetitions() as f64;
        assert!((agg.final_mean_regret() - direct).abs() < 1e-9);
        assert!(agg.mean_regret.windows(2).all(|w| w[0] <= w[1]));
        assert!(agg.std_regret.iter().all(|&s| s >= 0.0));
        for counts in &agg.final_counts {
            assert_eq!(counts.iter().sum::<u64>(), 500);
        }
    }

    #[test]
    fn hierarchical_policies_initialize_each_agent_once_when_t_equals_n() {
        for kind in [PolicyKind::HUcb, PolicyKind::RhUcb, PolicyKind::PrhUcb] {
            let agg = run_experiment(&small().with_horizon(5).with_policy(kind)).unwrap();
            for counts in &agg.final_counts {
                assert_eq!(counts, &vec![1; 5], "{kind}");
            }
        }
    }

    #[test]
    fn coupled_mode_shares_seeds_across_policies() {
        let mut cfg = small();
        cfg.coupled = true;
        let a = run_experiment(&cfg.clone().with_policy(PolicyKind::Ucb1)).unwrap();
        let b = run_experiment(&cfg.with_policy(PolicyKind::HUcb)).unwrap();
        assert_eq!(a.seeds, b.seeds);
        let c = run_experiment(&small().with_policy(PolicyKind::Ucb1)).unwrap();
        assert_ne!(a.seeds, c.seeds);
    }

    #[test]
    fn sweeps() {
        let axis = SweepAxis::Replicas {
            agent_id: 1,
            counts: vec![1, 4],
        };
        let out = sweep(&small(), &axis).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].seeds, out[1].seeds);
        assert_eq!(out[1].label, "hucb_k4");
        assert!(matches!(
            sweep(&small(), &SweepAxis::Policies(vec![])),
            Err(ConfigError::Invalid(_))
        ));
    }
}
