//! Stochastic multi-armed bandits with strategic arm replication.
//!
//! Agents register arms on behalf of a principal, possibly registering many
//! exact copies of the same underlying arm. This crate holds the pure,
//! allocation-only part of the toolkit:
//!
//! - [`model`]: original arms, agent strategies, the expanded instance and its
//!   gap structure.
//! - [`policy`]: UCB1, Fair(UCB1), S-UCB, H-UCB, RH-UCB and PRH-UCB behind one
//!   select/update state machine, plus the episode loop.
//! - [`metrics`]: pseudo-regret, discounted agent revenue, utilities and the
//!   closed-form regret bounds of the hierarchical policies.
//! - [`oracle`]: exhaustive path enumeration for short horizons, giving exact
//!   selection-count distributions and stochastic dominance certificates.
//!
//! Randomness always flows through [`random::RandomSource`], so the same
//! policy code runs against a seeded stream or the enumerating oracle.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod random;

pub use error::{Error, Result};
pub use model::{
    build_instance, draw_reward, summarize_gaps, AgentProfile, ArmId, GapSummary, History,
    Instance, OriginalArm, Record, RegisteredArm,
};
pub use policy::{run_episode, Policy, PolicyConfig, PolicyKind, Selection};
pub use random::{RandomSource, SeededSource, Stream};
