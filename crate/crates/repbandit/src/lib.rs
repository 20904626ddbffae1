//! Experiment harness and command-line front end for replication-aware
//! bandits: scenario files and built-in presets, seeded parallel repetitions,
//! CSV/JSON results, SVG figures and exact replication certificates.

pub mod cli;
pub mod config;
pub mod harness;
pub mod persist;
pub mod plot;
pub mod presets;
pub mod seeds;
pub mod verify;

pub use config::{parse_scenario, ConfigError, PolicySpec, ScenarioConfig};
pub use harness::{run_episode, run_experiment, sweep, AggregateResult, Experiment, SweepAxis};
