//! Principal regret, agent revenue and utility, and closed-form regret bounds.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{AgentId, GapSummary, History, Instance, Record};

/// Per-round weights applied to an agent's rewards.
///
/// Entries are non-negative and non-increasing, with at least as many
/// strictly positive entries as there are agents.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscountSequence {
    gammas: Vec<f64>,
}

impl DiscountSequence {
    pub fn new(gammas: Vec<f64>, n_agents: usize) -> Result<Self> {
        if gammas.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidDiscount(
                "weights must be finite and non-negative",
            ));
        }
        if gammas.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidDiscount("weights must be non-increasing"));
        }
        if gammas.iter().filter(|&&g| g > 0.0).count() < n_agents {
            return Err(Error::InvalidDiscount("fewer positive weights than agents"));
        }
        Ok(Self { gammas })
    }

    /// γ ≡ 1.
    pub fn ones(horizon: usize) -> Self {
        Self {
            gammas: vec![1.0; horizon],
        }
    }

    /// γ_t = 1/t.
    pub fn harmonic(horizon: usize) -> Self {
        Self {
            gammas: (1..=horizon).map(|t| 1.0 / t as f64).collect(),
        }
    }

    /// γ_t = ρ^(t-1) for ρ in (0, 1].
    pub fn geometric(horizon: usize, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidDiscount("geometric ratio must lie in (0, 1]"));
        }
        let mut g = 1.0;
        let gammas = (0..horizon)
            .map(|_| {
                let cur = g;
                g *= rho;
                cur
            })
            .collect();
        Ok(Self { gammas })
    }

    /// γ_t = 1 for t ≤ `cutoff`, 0 afterwards.
    pub fn truncated(horizon: usize, cutoff: usize) -> Self {
        Self {
            gammas: (1..=horizon)
                .map(|t| if t <= cutoff { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// γ_t for a 1-based round.
    pub fn at(&self, t: u64) -> f64 {
        self.gammas[(t - 1) as usize]
    }

    pub fn total(&self) -> f64 {
        self.gammas.iter().sum()
    }
}

/// A non-decreasing utility of revenue.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase", tag = "shape"))]
pub enum UtilityFunction {
    Identity,
    /// `v^p` for `p > 0`: concave (risk averse) when `p < 1`, convex when `p > 1`.
    Power {
        p: f64,
    },
    /// Piecewise-linear through `(v, u)` points sorted by `v`, flat outside.
    Table {
        points: Vec<(f64, f64)>,
    },
}

impl UtilityFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            UtilityFunction::Identity => Ok(()),
            UtilityFunction::Power { p } => {
                if *p > 0.0 && p.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidUtility("power must be positive"))
                }
            }
            UtilityFunction::Table { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidUtility("empty table"));
                }
                if points.windows(2).any(|w| {
                    w[1].0.partial_cmp(&w[0].0) != Some(core::cmp::Ordering::Greater)
                        || w[1].1 < w[0].1
                }) {
                    return Err(Error::InvalidUtility(
                        "table must have increasing inputs and non-decreasing outputs",
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            UtilityFunction::Identity => v,
            UtilityFunction::Power { p } => libm::pow(v.max(0.0), *p),
            UtilityFunction::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if v <= first.0 {
                    return first.1;
                }
                if v >= last.0 {
                    return last.1;
                }
                let k = points.partition_point(|p| p.0 <= v);
                let (x0, y0) = points[k - 1];
                let (x1, y1) = points[k];
                y0 + (y1 - y0) * (v - x0) / (x1 - x0)
            }
        }
    }
}

/// Per-round cumulative pseudo-regret `sum_{s<=t} Δ(A_s)`.
pub fn cumulative_regret(history: &History, gaps: &GapSummary) -> Result<Vec<f64>> {
    let mut total = 0.0;
    history
        .records()
        .iter()
        .map(|r| {
            let gap = gaps
                .per_arm_gap
                .get(r.arm)
                .ok_or(Error::UnknownArm(r.arm))?;
            total += gap;
            Ok(total)
        })
        .collect()
}

/// `v_i = sum_t γ_t R_t 1[A_t ∈ S_i]` for the agent at `agent` (index).
pub fn agent_revenue(history: &History, agent: usize, gamma: &DiscountSequence) -> Result<f64> {
    if gamma.len() < history.len() {
        return Err(Error::DiscountTooShort {
            have: gamma.len(),
            need: history.len(),
        });
    }
    Ok(history
        .records()
        .iter()
        .filter(|r| r.agent == agent)
        .map(|r| gamma.at(r.t) * f64::from(r.reward))
        .sum())
}

/// Geometrically spaced rounds `1..=horizon`: every round up to 100, then 50
/// per decade, always ending at `horizon`.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=horizon.min(100)).collect();
    let mut k = 0u32;
    loop {
        let t = libm::round(100.0 * libm::pow(10.0, f64::from(k) / 50.0)) as u64;
        k += 1;
        if t >= horizon {
            break;
        }
        if t > *out.last().unwrap_or(&0) {
            out.push(t);
        }
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// One episode reduced to checkpointed trajectories and final revenues.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunResult {
    pub seed: u64,
    pub checkpoints: Vec<u64>,
    /// Cumulative pseudo-regret at each checkpoint.
    pub regret: Vec<f64>,
    /// Discounted revenue per agent at each checkpoint.
    pub revenue: Vec<Vec<f64>>,
    /// Selection count `N_{S_i,t}` per agent at each checkpoint.
    pub agent_counts: Vec<Vec<u64>>,
    /// Final discounted revenue `v_i` per agent.
    pub agent_revenue: Vec<f64>,
    /// Exact final pseudo-regret.
    pub final_regret: f64,
}

impl RunResult {
    pub fn horizon(&self) -> u64 {
        self.checkpoints.last().copied().unwrap_or(0)
    }

    pub fn final_counts(&self) -> &[u64] {
        self.agent_counts.last().map_or(&[], Vec::as_slice)
    }
}

/// Folds per-round records into a [`RunResult`].
#[derive(Debug, Clone)]
pub struct RunRecorder<'a> {
    gaps: &'a GapSummary,
    discount: &'a DiscountSequence,
    checkpoints: Vec<u64>,
    next: usize,
    regret: f64,
    revenue: Vec<f64>,
    counts: Vec<u64>,
    result: RunResult,
}

impl<'a> RunRecorder<'a> {
    pub fn new(
        instance: &Instance,
        gaps: &'a GapSummary,
        discount: &'a DiscountSequence,
        horizon: u64,
        seed: u64,
    ) -> Result<Self> {
        if (discount.len() as u64) < horizon {
            return Err(Error::DiscountTooShort {
                have: discount.len(),
                need: horizon as usize,
            });
        }
        let n = instance.n_agents();
        let checkpoints = checkpoints(horizon);
        Ok(Self {
            gaps,
            discount,
            next: 0,
            regret: 0.0,
            revenue: vec![0.0; n],
            counts: vec![0; n],
            result: RunResult {
                seed,
                checkpoints: checkpoints.clone(),
                regret: Vec::with_capacity(checkpoints.len()),
                revenue: Vec::with_capacity(checkpoints.len()),
                agent_counts: Vec::with_capacity(checkpoints.len()),
                agent_revenue: Vec::new(),
                final_regret: 0.0,
            },
            checkpoints,
        })
    }

    pub fn observe(&mut self, record: &Record) {
        self.regret += self.gaps.per_arm_gap[record.arm];
        self.revenue[record.agent] += self.discount.at(record.t) * f64::from(record.reward);
        self.counts[record.agent] += 1;
        if self.checkpoints.get(self.next) == Some(&record.t) {
            self.result.regret.push(self.regret);
            self.result.revenue.push(self.revenue.clone());
            self.result.agent_counts.push(self.counts.clone());
            self.next += 1;
        }
    }

    pub fn finish(mut self) -> RunResult {
        self.result.agent_revenue = self.revenue;
        self.result.final_regret = self.regret;
        self.result
    }
}

/// Sample mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var))
}

/// Mean of `U(v_i)` across repetitions with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UtilityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub repetitions: usize,
}

pub fn expected_utility(
    results: &[RunResult],
    agent: usize,
    utility: &UtilityFunction,
) -> UtilityEstimate {
    let values: Vec<f64> = results
        .iter()
        .map(|r| utility.eval(r.agent_revenue[agent]))
        .collect();
    let (mean, std) = mean_std(&values);
    let std_error = std / libm::sqrt(values.len() as f64);
    UtilityEstimate {
        mean,
        std_error,
        lower: mean - 1.96 * std_error,
        upper: mean + 1.96 * std_error,
        repetitions: values.len(),
    }
}

/// Logarithmic bound for H-UCB at equilibrium:
/// `sum_{Δ_i>0} (8/Δ_i) ln T + (1 + π²/3) sum_i Δ_i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HucbBound {
    pub value: f64,
    /// Agents with Δ_i = 0, which contribute no log term.
    pub zero_gap_agents: Vec<AgentId>,
}

pub fn hucb_bound(gaps: &GapSummary, horizon: u64) -> HucbBound {
    let ln_t = libm::log(horizon as f64);
    let mut log_terms = 0.0;
    let mut zero_gap_agents = Vec::new();
    for (i, &d) in gaps.per_agent_gap.iter().enumerate() {
        if d > 0.0 {
            log_terms += 8.0 / d * ln_t;
        } else {
            zero_gap_agents.push(gaps.agent_ids[i]);
        }
    }
    let total_gap: f64 = gaps.per_agent_gap.iter().sum();
    HucbBound {
        value: log_terms + (1.0 + core::f64::consts::PI * core::f64::consts::PI / 3.0) * total_gap,
        zero_gap_agents,
    }
}

/// A gap-reciprocal term left out of a bound because its gap is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SkippedTerm {
    /// `4/Δ_i²` with Δ_i = 0.
    AgentGap { agent: AgentId },
    /// `L/δ_{i,a}` with δ_{i,a} = 0 (the agent's best originals).
    InternalGap { agent: AgentId, origin_index: u32 },
}

/// Leading `sqrt(T) ln T` terms of the RH-UCB bound with replicators.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RhucbBound {
    pub leading: f64,
    /// The part of `leading` that does not scale with L.
    pub base: f64,
    /// `leading = base + L * per_unit_l`.
    pub per_unit_l: f64,
    /// Whether L ≥ 1/c holds; the bound is only claimed when it does.
    pub precondition_met: bool,
    /// Agent index whose originals supply the `50L/δ_{i*,a}` terms.
    pub optimal_agent: AgentId,
    pub skipped: Vec<SkippedTerm>,
}

impl RhucbBound {
    /// The remainder has no stated constant.
    pub const REMAINDER: &'static str = "+ O(ln^5 T) (constant not quantified)";
}

pub fn rhucb_bound(gaps: &GapSummary, horizon: u64, robust_ratio: f64) -> RhucbBound {
    let t = horizon as f64;
    let scale = libm::sqrt(t) * libm::log(t);
    let n = gaps.per_agent_gap.len();
    let star = gaps
        .per_agent_gap
        .iter()
        .position(|&d| d == 0.0)
        .expect("some agent owns the best original");

    let mut skipped = Vec::new();
    let internal_sum = |i: usize, skipped: &mut Vec<SkippedTerm>| -> f64 {
        let mut s = 0.0;
        for (k, &d) in gaps.internal_gap[i].iter().enumerate() {
            if d > 0.0 {
                s += 1.0 / d;
            } else {
                skipped.push(SkippedTerm::InternalGap {
                    agent: gaps.agent_ids[i],
                    origin_index: k as u32 + 1,
                });
            }
        }
        s
    };
    let star_sum = internal_sum(star, &mut Vec::new());

    let mut base = 0.0;
    let mut per_unit_l = 0.0;
    for i in 0..n {
        let d = gaps.per_agent_gap[i];
        base += 1.0;
        if d > 0.0 {
            base += 4.0 / (d * d);
        } else {
            skipped.push(SkippedTerm::AgentGap {
                agent: gaps.agent_ids[i],
            });
        }
        per_unit_l += 50.0 * star_sum + 114.0 * internal_sum(i, &mut skipped);
    }
    let base = base * scale;
    let per_unit_l = per_unit_l * scale;
    RhucbBound {
        leading: base + robust_ratio * per_unit_l,
        base,
        per_unit_l,
        precondition_met: robust_ratio * gaps.best_fraction >= 1.0,
        optimal_agent: gaps.agent_ids[star],
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, summarize_gaps, AgentProfile};
    use alloc::vec;

    fn fig1_gaps() -> GapSummary {
        let profiles: Vec<AgentProfile> = [0.5, 0.6, 0.7, 0.8, 0.9]
            .iter()
            .enumerate()
            .map(|(i, &m)| AgentProfile::single(i as u32 + 1, m, 1))
            .collect();
        summarize_gaps(&build_instance(&profiles).unwrap())
    }

    fn history(records: &[(usize, usize, u8)]) -> History {
        let mut h = History::new();
        for (t, &(arm, agent, reward)) in records.iter().enumerate() {
            h.push(Record {
                t: t as u64 + 1,
                arm,
                agent,
                reward,
            })
            .unwrap();
        }
        h
    }

    #[test]
    fn hucb_bound_on_fig1_instance() {
        // 8 ln(1e4) (1/0.4 + 1/0.3 + 1/0.2 + 1/0.1) + (1 + π²/3) * 1.0
        let b = hucb_bound(&fig1_gaps(), 10_000);
        assert!((b.value - 1539.35).abs() < 0.01, "{}", b.value);
        assert_eq!(b.zero_gap_agents, vec![5]);
    }

    #[test]
    fn hucb_bound_log_additivity() {
        let g = fig1_gaps();
        let inv: f64 = g
            .per_agent_gap
            .iter()
            .filter(|&&d| d > 0.0)
            .map(|d| 1.0 / d)
            .sum();
        let diff = hucb_bound(&g, 20_000).value - hucb_bound(&g, 10_000).value;
        assert!((diff - 8.0 * libm::log(2.0) * inv).abs() < 1e-9);
    }

    #[test]
    fn zero_gaps_give_zero_hucb_bound() {
        let g = summarize_gaps(&build_instance(&[AgentProfile::single(1, 0.4, 3)]).unwrap());
        assert_eq!(hucb_bound(&g, 1000).value, 0.0);
    }

    #[test]
    fn rhucb_bound_only_unit_terms_without_gaps() {
        let profiles = vec![
            AgentProfile::single(1, 0.4, 3),
            AgentProfile::single(2, 0.4, 1),
        ];
        let g = summarize_gaps(&build_instance(&profiles).unwrap());
        let b = rhucb_bound(&g, 10_000, 2.0);
        let scale = libm::sqrt(1e4) * libm::log(1e4);
        assert!((b.leading - 2.0 * scale).abs() < 1e-9);
        assert_eq!(b.skipped.len(), 4);
    }

    #[test]
    fn rhucb_bound_is_affine_in_l() {
        let profiles = vec![
            AgentProfile::new(1, &[0.9, 0.2, 0.1], &[10, 100, 100]),
            AgentProfile::new(2, &[0.5, 0.2, 0.1], &[1000, 1000, 1000]),
        ];
        let g = summarize_gaps(&build_instance(&profiles).unwrap());
        let b1 = rhucb_bound(&g, 10_000, 1.0);
        let b3 = rhucb_bound(&g, 10_000, 3.0);
        let b5 = rhucb_bound(&g, 10_000, 5.0);
        assert!(((b5.leading - b3.leading) - (b3.leading - b1.leading)).abs() < 1e-6);
        assert!((b3.leading - b1.leading - 2.0 * b1.per_unit_l).abs() < 1e-6);
        assert!(!b1.precondition_met);
        assert!(rhucb_bound(&g, 10_000, 21.0).precondition_met);
    }

    #[test]
    fn regret_accumulates_gaps() {
        let g = fig1_gaps();
        let opt = history(&[(4, 4, 1); 10]);
        assert!(cumulative_regret(&opt, &g)
            .unwrap()
            .iter()
            .all(|&r| r == 0.0));
        let bad = history(&[(0, 0, 1); 7]);
        let r = cumulative_regret(&bad, &g).unwrap();
        assert!((r[6] - 0.4 * 7.0).abs() < 1e-12);
        assert_eq!(
            cumulative_regret(&history(&[(9, 0, 0)]), &g),
            Err(Error::UnknownArm(9))
        );
    }

    #[test]
    fn revenue_under_discounts() {
        let h = history(&[(0, 0, 0), (1, 1, 1), (1, 1, 1)]);
        assert_eq!(
            agent_revenue(&h, 0, &DiscountSequence::ones(3)).unwrap(),
            0.0
        );
        assert_eq!(
            agent_revenue(&h, 1, &DiscountSequence::ones(3)).unwrap(),
            2.0
        );
        let single = history(&[(0, 0, 0), (1, 1, 1)]);
        assert_eq!(
            agent_revenue(&single, 1, &DiscountSequence::harmonic(2)).unwrap(),
            0.5
        );
        assert!(agent_revenue(&h, 1, &DiscountSequence::ones(2)).is_err());
    }

    #[test]
    fn discount_validation() {
        assert!(DiscountSequence::new(vec![1.0, 0.5, 0.5], 2).is_ok());
        assert!(DiscountSequence::new(vec![0.5, 1.0], 1).is_err());
        assert!(DiscountSequence::new(vec![1.0, 0.0, 0.0], 2).is_err());
        assert!(DiscountSequence::new(vec![-1.0], 0).is_err());
        assert!(DiscountSequence::geometric(3, 1.5).is_err());
        assert_eq!(
            DiscountSequence::geometric(3, 0.5).unwrap().gammas(),
            &[1.0, 0.5, 0.25]
        );
        assert_eq!(
            DiscountSequence::truncated(4, 2).gammas(),
            &[1.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn utility_shapes() {
        let concave = UtilityFunction::Power { p: 0.5 };
        assert_eq!(concave.eval(16.0), 4.0);
        let table = UtilityFunction::Table {
            points: vec![(0.0, 0.0), (10.0, 5.0), (20.0, 5.0)],
        };
        table.validate().unwrap();
        assert_eq!(table.eval(5.0), 2.5);
        assert_eq!(table.eval(-1.0), 0.0);
        assert_eq!(table.eval(100.0), 5.0);
        assert!(UtilityFunction::Table {
            points: vec![(0.0, 1.0), (1.0, 0.0)]
        }
        .validate()
        .is_err());
        assert!(UtilityFunction::Power { p: 0.0 }.validate().is_err());
    }

    #[test]
    fn checkpoint_grid() {
        let c = checkpoints(100_000);
        assert_eq!(&c[..3], &[1, 2, 3]);
        assert_eq!(*c.last().unwrap(), 100_000);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c.len() < 300);
        assert_eq!(checkpoints(5), vec![1, 2, 3, 4, 5]);
        assert_eq!(*checkpoints(1234).last().unwrap(), 1234);
    }

    #[test]
    fn utility_estimate_of_identical_runs_has_zero_width() {
        let run = RunResult {
            seed: 0,
            checkpoints: vec![3],
            regret: vec![0.0],
            revenue: vec![vec![3.0]],
            agent_counts: vec![vec![3]],
            agent_revenue: vec![3.0],
            final_regret: 0.0,
        };
        let est = expected_utility(&[run.clone(), run], 0, &UtilityFunction::Identity);
        assert_eq!(est.mean, 3.0);
        assert_eq!(est.upper - est.lower, 0.0);
    }
}
