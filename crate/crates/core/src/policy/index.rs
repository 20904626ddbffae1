//! Exploration indices. `ln` is the natural log, clamped at 0 so that a clock
//! of 1 (or anything below) contributes no bonus.

use super::AgentStats;

/// Indices within this distance of the maximum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn ln_clock(t: f64) -> f64 {
    libm::log(t).max(0.0)
}

/// `mean + sqrt(2 ln t / n)`; requires `n >= 1`.
pub fn ucb1_index(mean: f64, n: u64, t: f64) -> f64 {
    ucb1_index_ln(mean, n, ln_clock(t))
}

pub(crate) fn ucb1_index_ln(mean: f64, n: u64, ln_t: f64) -> f64 {
    mean + libm::sqrt(2.0 * ln_t / n as f64)
}

/// H-UCB agent index `R(i) + sqrt(2 ln t / N(i))`.
pub fn hucb_agent_index(stats: &AgentStats, t: u64) -> f64 {
    let ln_t = ln_clock(t as f64);
    stats.mean + libm::sqrt(2.0 * ln_t / stats.count as f64)
}

/// RH-UCB agent index `R(i) + sqrt(sqrt(t) ln t / N(i))`.
pub fn rhucb_agent_index(stats: &AgentStats, t: u64) -> f64 {
    let t = t as f64;
    stats.mean + libm::sqrt(libm::sqrt(t) * ln_clock(t) / stats.count as f64)
}

/// PRH-UCB agent index `R(i) + sqrt(sqrt(t ln^3 t) / N(i))`.
pub fn prhucb_agent_index(stats: &AgentStats, t: u64) -> f64 {
    let t = t as f64;
    let ln_t = ln_clock(t);
    stats.mean + libm::sqrt(libm::sqrt(t * ln_t * ln_t * ln_t) / stats.count as f64)
}
