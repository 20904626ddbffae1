//! Built-in scenarios.
//!
//! All four share five agents with optimal means 0.5, 0.6, 0.7, 0.8 and 0.9
//! (agent ids 1 to 5), horizon 10^5 and 100 repetitions.
//!
//! - `fig1`: one arm per agent; sweep agent 1's replicas to study revenue.
//! - `fig2a`: agent 1 registers 1000 copies of its arm.
//! - `fig2b`: every agent except agent 5 registers 1000 copies.
//! - `fig2c`: three originals per agent, the optimal one plus common arms of
//!   mean 0.2 and 0.1. Agents 1 to 3 register 1000 copies of each original,
//!   agents 4 and 5 register 10 copies of the optimal and 100 of each
//!   suboptimal arm.

use repbandit_core::AgentProfile;

use crate::config::ScenarioConfig;

pub const NAMES: [&str; 4] = ["fig1", "fig2a", "fig2b", "fig2c"];

pub const OPTIMAL_MEANS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

pub const DEFAULT_HORIZON: u64 = 100_000;
pub const DEFAULT_REPETITIONS: u32 = 100;

fn singles(copies: [u32; 5]) -> Vec<AgentProfile> {
    OPTIMAL_MEANS
        .iter()
        .zip(copies)
        .enumerate()
        .map(|(i, (&m, c))| AgentProfile::single(i as u32 + 1, m, c))
        .collect()
}

fn scenario(name: &str, agents: Vec<AgentProfile>) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(name, agents)
        .with_horizon(DEFAULT_HORIZON)
        .with_repetitions(DEFAULT_REPETITIONS);
    cfg.preset = Some(name.to_string());
    cfg
}

/// `fig1` with agent 1 registering `k` copies.
pub fn fig1(k: u32) -> ScenarioConfig {
    scenario("fig1", singles([k, 1, 1, 1, 1]))
}

pub fn fig2a() -> ScenarioConfig {
    scenario("fig2a", singles([1000, 1, 1, 1, 1]))
}

pub fn fig2b() -> ScenarioConfig {
    scenario("fig2b", singles([1000, 1000, 1000, 1000, 1]))
}

pub fn fig2c() -> ScenarioConfig {
    let agents = OPTIMAL_MEANS
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let copies = if i < 3 {
                [1000, 1000, 1000]
            } else {
                [10, 100, 100]
            };
            AgentProfile::new(i as u32 + 1, &[m, 0.2, 0.1], &copies)
        })
        .collect();
    scenario("fig2c", agents)
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    match name {
        "fig1" => Some(fig1(1)),
        "fig2a" => Some(fig2a()),
        "fig2b" => Some(fig2b()),
        "fig2c" => Some(fig2c()),
        _ => None,
    }
}

pub fn builtin_presets() -> Vec<ScenarioConfig> {
    NAMES
        .iter()
        .map(|n| preset(n).expect("listed preset"))
        .collect()
}
