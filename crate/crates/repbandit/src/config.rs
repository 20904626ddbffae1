//! Scenario configuration and the scenario file format.
//!
//! A scenario file is a line-oriented key/value document split into
//! sections. `[agent]` may repeat, one block per agent:
//!
//! ```text
//! [scenario]
//! name = demo
//! horizon = 10000
//! repetitions = 50
//! seed = 7
//!
//! [policy]
//! kind = rhucb
//! L = 3
//!
//! [agents]
//! preset = fig1
//!
//! [agent]
//! id = 1
//! means = 0.5, 0.2
//! copies = 100, 1
//! ```
//!
//! `#` and `;` start comments. An `[agent]` block whose id matches a preset
//! agent replaces it; other ids are added.

use std::fmt;
use std::path::Path;

use repbandit_core::metrics::{DiscountSequence, UtilityFunction};
use repbandit_core::policy::{FairClock, TieBreak};
use repbandit_core::{
    build_instance, summarize_gaps, AgentProfile, Instance, PolicyConfig, PolicyKind,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presets;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown preset `{0}` (known: {known})", known = presets::NAMES.join(", "))]
    UnknownPreset(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("invalid instance: {0}")]
    Model(#[from] repbandit_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Policy choice plus hyperparameters. Unset ratios are resolved against the
/// instance: `L` defaults to `max(1, 1/c)` and `l` to the number of original
/// arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub robust_ratio: Option<f64>,
    pub sample_ratio: Option<f64>,
    pub fair_clock: FairClock,
    pub tie_break: TieBreak,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            robust_ratio: None,
            sample_ratio: None,
            fair_clock: FairClock::default(),
            tie_break: TieBreak::default(),
        }
    }

    pub fn resolve(&self, instance: &Instance, horizon: u64) -> PolicyConfig {
        let c = summarize_gaps(instance).best_fraction;
        let robust =
            self.robust_ratio
                .unwrap_or_else(|| if c > 0.0 { (1.0 / c).max(1.0) } else { 1.0 });
        let sample = self
            .sample_ratio
            .unwrap_or(instance.original_count() as f64);
        PolicyConfig::new(self.kind, horizon)
            .with_robust_ratio(robust)
            .with_sample_ratio(sample)
            .with_fair_clock(self.fair_clock)
            .with_tie_break(self.tie_break)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum DiscountSpec {
    #[default]
    Ones,
    Harmonic,
    Geometric {
        rho: f64,
    },
    Truncated {
        cutoff: usize,
    },
}

impl DiscountSpec {
    pub fn sequence(&self, horizon: u64, n_agents: usize) -> Result<DiscountSequence, ConfigError> {
        let h = horizon as usize;
        let seq = match *self {
            DiscountSpec::Ones => DiscountSequence::ones(h),
            DiscountSpec::Harmonic => DiscountSequence::harmonic(h),
            DiscountSpec::Geometric { rho } => DiscountSequence::geometric(h, rho)?,
            DiscountSpec::Truncated { cutoff } => DiscountSequence::truncated(h, cutoff),
        };
        DiscountSequence::new(seq.gammas().to_vec(), n_agents)?;
        Ok(seq)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub horizon: u64,
    pub repetitions: u32,
    pub base_seed: u64,
    /// Share per-repetition seeds across policies.
    pub coupled: bool,
    pub policy: PolicySpec,
    pub preset: Option<String>,
    pub agents: Vec<AgentProfile>,
    pub discount: DiscountSpec,
    pub utility: UtilityFunction,
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>, agents: Vec<AgentProfile>) -> Self {
        Self {
            name: name.into(),
            horizon: 10_000,
            repetitions: 100,
            base_seed: 1,
            coupled: false,
            policy: PolicySpec::new(PolicyKind::HUcb),
            preset: None,
            agents,
            discount: DiscountSpec::Ones,
            utility: UtilityFunction::Identity,
        }
    }

    pub fn with_policy(mut self, kind: PolicyKind) -> Self {
        self.policy.kind = kind;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_repetitions(mut self, reps: u32) -> Self {
        self.repetitions = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    /// Sets every copy count of `agent_id` to `copies`.
    pub fn with_replicas(mut self, agent_id: u32, copies: u32) -> Result<Self, ConfigError> {
        let profile = self
            .agents
            .iter_mut()
            .find(|p| p.agent_id == agent_id)
            .ok_or_else(|| ConfigError::Invalid(format!("no agent with id {agent_id}")))?;
        profile.copy_counts.iter_mut().for_each(|c| *c = copies);
        Ok(self)
    }

    pub fn instance(&self) -> Result<Instance, ConfigError> {
        Ok(build_instance(&self.agents)?)
    }

    pub fn validate(&self) -> Result<Instance, ConfigError> {
        let instance = self.instance()?;
        if self.repetitions == 0 {
            return Err(ConfigError::Invalid(
                "repetitions must be at least 1".into(),
            ));
        }
        if self.horizon < instance.n_agents() as u64 {
            return Err(ConfigError::Invalid(format!(
                "horizon {} is shorter than the agent count {}",
                self.horizon,
                instance.n_agents()
            )));
        }
        self.policy.resolve(&instance, self.horizon).validate()?;
        self.utility.validate()?;
        self.discount.sequence(self.horizon, instance.n_agents())?;
        Ok(instance)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        parse_scenario(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Scenario,
    Policy,
    Agents,
    Agent,
    Discount,
    Utility,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Section::None => "(top level)",
            Section::Scenario => "[scenario]",
            Section::Policy => "[policy]",
            Section::Agents => "[agents]",
            Section::Agent => "[agent]",
            Section::Discount => "[discount]",
            Section::Utility => "[utility]",
        };
        f.write_str(name)
    }
}

#[derive(Default)]
struct AgentBlock {
    line: usize,
    id: Option<u32>,
    means: Option<Vec<f64>>,
    copies: Option<Vec<u32>>,
}

#[derive(Default)]
struct Block {
    line: usize,
    kind: Option<String>,
    values: Vec<(usize, String, String)>,
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::at(line, format!("`{key}` expects a number, got `{value}`")))
}

fn list<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(|v| number(line, key, v.trim()))
        .collect()
}

fn boolean(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::at(
            line,
            format!("`{key}` expects true or false, got `{value}`"),
        )),
    }
}

/// Parses a scenario document. Errors carry 1-based line numbers.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut name = None;
    let mut horizon = None;
    let mut reps = None;
    let mut seed = None;
    let mut coupled = false;
    let mut policy = PolicySpec::new(PolicyKind::HUcb);
    let mut preset: Option<(usize, String)> = None;
    let mut blocks: Vec<AgentBlock> = Vec::new();
    let mut discount = Block::default();
    let mut utility = Block::default();
    let mut section = Section::None;
    let mut seen = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, "unterminated section header"))?
                .trim();
            section = match header {
                "scenario" => Section::Scenario,
                "policy" => Section::Policy,
                "agents" => Section::Agents,
                "agent" => Section::Agent,
                "discount" => Section::Discount,
                "utility" => Section::Utility,
                other => return Err(ConfigError::at(line, format!("unknown section [{other}]"))),
            };
            match section {
                Section::Agent => blocks.push(AgentBlock {
                    line,
                    ..AgentBlock::default()
                }),
                _ if seen.contains(&section) => {
                    return Err(ConfigError::at(
                        line,
                        format!("section {section} appears twice"),
                    ))
                }
                Section::Discount => discount.line = line,
                Section::Utility => utility.line = line,
                _ => {}
            }
            seen.push(section);
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            ConfigError::at(line, format!("expected `key = value`, got `{content}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("`{key}` has no value")));
        }
        let unknown = || ConfigError::at(line, format!("unknown key `{key}` in {section}"));
        match section {
            Section::None => {
                return Err(ConfigError::at(line, "key outside of any section"));
            }
            Section::Scenario => match key {
                "name" => name = Some(value.to_string()),
                "horizon" | "T" => horizon = Some(number::<u64>(line, key, value)?),
                "repetitions" | "reps" => reps = Some(number::<u32>(line, key, value)?),
                "seed" => seed = Some(number::<u64>(line, key, value)?),
                "coupled" => coupled = boolean(line, key, value)?,
                _ => return Err(unknown()),
            },
            Section::Policy => match key {
                "kind" => {
                    policy.kind = value
                        .parse()
                        .map_err(|_| ConfigError::at(line, format!("unknown policy `{value}`")))?
                }
                "L" => policy.robust_ratio = Some(number(line, key, value)?),
                "l" => policy.sample_ratio = Some(number(line, key, value)?),
                "fair_clock" => {
                    policy.fair_clock = match value {
                        "local" => FairClock::Local,
                        "global" => FairClock::Global,
                        _ => {
                            return Err(ConfigError::at(line, "fair_clock is `local` or `global`"))
                        }
                    }
                }
                "tie_break" => {
                    policy.tie_break = match value {
                        "uniform" => TieBreak::Uniform,
                        "lowest" => TieBreak::Lowest,
                        _ => {
                            return Err(ConfigError::at(line, "tie_break is `uniform` or `lowest`"))
                        }
                    }
                }
                _ => return Err(unknown()),
            },
            Section::Agents => match key {
                "preset" => preset = Some((line, value.to_string())),
                _ => return Err(unknown()),
            },
            Section::Agent => {
                let block = blocks.last_mut().expect("inside an [agent] block");
                match key {
                    "id" => block.id = Some(number(line, key, value)?),
                    "means" => block.means = Some(list(line, key, value)?),
                    "copies" => block.copies = Some(list(line, key, value)?),
                    _ => return Err(unknown()),
                }
            }
            Section::Discount | Section::Utility => {
                let block = if section == Section::Discount {
                    &mut discount
                } else {
                    &mut utility
                };
                if key == "kind" {
                    block.kind = Some(value.to_string());
                } else {
                    block
                        .values
                        .push((line, key.to_string(), value.to_string()));
                }
            }
        }
    }

    let mut agents: Vec<AgentProfile> = match &preset {
        Some((line, tag)) => presets::preset(tag)
            .map(|p| p.agents)
            .ok_or_else(|| ConfigError::at(*line, format!("unknown preset `{tag}`")))?,
        None => Vec::new(),
    };
    for block in blocks {
        let id = block
            .id
            .ok_or_else(|| ConfigError::at(block.line, "[agent] block without `id`"))?;
        let means = block
            .means
            .ok_or_else(|| ConfigError::at(block.line, format!("agent {id} has no `means`")))?;
        let copies = block.copies.unwrap_or_else(|| vec![1; means.len()]);
        if copies.len() != means.len() {
            return Err(ConfigError::at(
                block.line,
                format!(
                    "agent {id}: {} means but {} copy counts",
                    means.len(),
                    copies.len()
                ),
            ));
        }
        let profile = AgentProfile::new(id, &means, &copies);
        profile
            .validate()
            .map_err(|e| ConfigError::at(block.line, e.to_string()))?;
        match agents.iter_mut().find(|p| p.agent_id == id) {
            Some(existing) => *existing = profile,
            None => agents.push(profile),
        }
    }
    if agents.is_empty() {
        return Err(ConfigError::Invalid(
            "no agents: add [agent] blocks or an [agents] preset".into(),
        ));
    }

    let base_name = preset.as_ref().map(|(_, p)| p.clone());
    let mut config = ScenarioConfig::new(
        name.or_else(|| base_name.clone())
            .unwrap_or_else(|| "scenario".into()),
        agents,
    );
    if let Some(tag) = &base_name {
        let p = presets::preset(tag).expect("checked above");
        config.horizon = p.horizon;
        config.repetitions = p.repetitions;
    }
    config.preset = base_name;
    config.horizon = horizon.unwrap_or(config.horizon);
    config.repetitions = reps.unwrap_or(config.repetitions);
    config.base_seed = seed.unwrap_or(config.base_seed);
    config.coupled = coupled;
    config.policy = policy;
    config.discount = parse_discount(&discount)?;
    config.utility = parse_utility(&utility)?;
    Ok(config)
}

fn only_key<'a>(
    block: &'a Block,
    section: &str,
    key: &str,
) -> Result<Option<(usize, &'a str)>, ConfigError> {
    let mut found = None;
    for (line, k, v) in &block.values {
        if k != key {
            return Err(ConfigError::at(
                *line,
                format!("unknown key `{k}` in {section}"),
            ));
        }
        found = Some((*line, v.as_str()));
    }
    Ok(found)
}

fn parse_discount(block: &Block) -> Result<DiscountSpec, ConfigError> {
    let required = |key: &str| {
        only_key(block, "[discount]", key)?
            .ok_or_else(|| ConfigError::at(block.line, format!("discount needs `{key}`")))
    };
    match block.kind.as_deref() {
        None | Some("ones") => {
            only_key(block, "[discount]", "")?;
            Ok(DiscountSpec::Ones)
        }
        Some("harmonic") => {
            only_key(block, "[discount]", "")?;
            Ok(DiscountSpec::Harmonic)
        }
        Some("geometric") => {
            let (line, v) = required("rho")?;
            Ok(DiscountSpec::Geometric {
                rho: number(line, "rho", v)?,
            })
        }
        Some("truncated") => {
            let (line, v) = required("cutoff")?;
            Ok(DiscountSpec::Truncated {
                cutoff: number(line, "cutoff", v)?,
            })
        }
        Some(other) => Err(ConfigError::at(
            block.line,
            format!("unknown discount kind `{other}`"),
        )),
    }
}

fn parse_utility(block: &Block) -> Result<UtilityFunction, ConfigError> {
    let required = |key: &str| {
        only_key(block, "[utility]", key)?
            .ok_or_else(|| ConfigError::at(block.line, format!("utility needs `{key}`")))
    };
    let utility = match block.kind.as_deref() {
        None | Some("identity") => {
            only_key(block, "[utility]", "")?;
            UtilityFunction::Identity
        }
        Some("power") => {
            let (line, v) = required("p")?;
            UtilityFunction::Power {
                p: number(line, "p", v)?,
            }
        }
        Some("table") => {
            let (line, v) = required("points")?;
            let points = v
                .split(',')
                .map(|pair| {
                    let (x, y) = pair
                        .split_once(':')
                        .ok_or_else(|| ConfigError::at(line, "points are `x:y` pairs"))?;
                    Ok((
                        number(line, "points", x.trim())?,
                        number(line, "points", y.trim())?,
                    ))
                })
                .collect::<Result<Vec<(f64, f64)>, ConfigError>>()?;
            UtilityFunction::Table { points }
        }
        Some(other) => {
            return Err(ConfigError::at(
                block.line,
                format!("unknown utility kind `{other}`"),
            ))
        }
    };
    utility
        .validate()
        .map_err(|e| ConfigError::at(block.line, e.to_string()))?;
    Ok(utility)
}
