//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error,
//! 3 verification failed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use repbandit_core::metrics::{hucb_bound, rhucb_bound, RhucbBound, SkippedTerm};
use repbandit_core::policy::TieBreak;
use repbandit_core::{summarize_gaps, Error as CoreError, PolicyKind};

use crate::config::{ConfigError, ScenarioConfig};
use crate::harness::{run_experiment, sweep, AggregateResult, SweepAxis};
use crate::persist::{file_stem, output_dir, read_result, write_result};
use crate::plot::{long_csv, render_svg, Series};
use crate::presets;
use crate::verify::{self, toy_instance, VerifyReport};

#[derive(Debug, Parser)]
#[command(
    name = "repbandit",
    version,
    about = "Simulate and verify bandit policies under strategic arm replication"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario under one policy and write CSV/JSON results
    Simulate(SimulateArgs),
    /// Run a scenario over a list of policies and/or replica counts
    Sweep(SweepArgs),
    /// Print the closed-form regret bounds and the gap table of a scenario
    Bound(BoundArgs),
    /// Check replication proneness/proofness by exact enumeration
    Verify(VerifyArgs),
    /// Render result files into an SVG figure and a long-format CSV
    Plot(PlotArgs),
    /// List the built-in scenarios
    Presets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Ucb1,
    Fair,
    Sucb,
    Hucb,
    Rhucb,
    Prhucb,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Ucb1 => PolicyKind::Ucb1,
            PolicyArg::Fair => PolicyKind::Fair,
            PolicyArg::Sucb => PolicyKind::SUcb,
            PolicyArg::Hucb => PolicyKind::HUcb,
            PolicyArg::Rhucb => PolicyKind::RhUcb,
            PolicyArg::Prhucb => PolicyKind::PrhUcb,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Built-in scenario: fig1, fig2a, fig2b or fig2c
    #[arg(long, value_name = "NAME", conflicts_with = "scenario")]
    pub preset: Option<String>,
    /// Scenario file
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    /// Horizon (number of rounds)
    #[arg(long = "T", value_name = "ROUNDS")]
    pub horizon: Option<u64>,
    /// Number of repetitions
    #[arg(long, value_name = "N")]
    pub reps: Option<u32>,
    /// Base seed
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// RH-UCB subsample ratio L (default: max(1, 1/c))
    #[arg(long = "L", value_name = "RATIO")]
    pub robust_ratio: Option<f64>,
    /// S-UCB subsample ratio l (default: number of original arms)
    #[arg(long = "l", value_name = "RATIO")]
    pub sample_ratio: Option<f64>,
    /// Reuse the same per-repetition seeds for every policy
    #[arg(long)]
    pub coupled: bool,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = match (&self.preset, &self.scenario) {
            (Some(name), _) => {
                presets::preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?
            }
            (None, Some(path)) => ScenarioConfig::from_file(path)?,
            (None, None) => {
                return Err(ConfigError::Invalid(
                    "pass --preset NAME or --scenario FILE".into(),
                ))
            }
        };
        if let Some(t) = self.horizon {
            cfg.horizon = t;
        }
        if let Some(r) = self.reps {
            cfg.repetitions = r;
        }
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if self.robust_ratio.is_some() {
            cfg.policy.robust_ratio = self.robust_ratio;
        }
        if self.sample_ratio.is_some() {
            cfg.policy.sample_ratio = self.sample_ratio;
        }
        cfg.coupled |= self.coupled;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Policy (default: the scenario's)
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    /// Output directory (default: $SB_OUT, else ./results)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated policies to compare
    #[arg(long, value_enum, value_delimiter = ',')]
    pub policies: Vec<PolicyArg>,
    /// Comma-separated copy counts for the swept agent
    #[arg(long, value_delimiter = ',', value_name = "K")]
    pub replicas: Vec<u32>,
    /// Agent id whose copies are swept
    #[arg(long, value_name = "ID", default_value_t = 1)]
    pub agent: u32,
    /// Output directory (default: $SB_OUT, else ./results)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance to certify (default: two single-arm agents, means 0.7 and 0.5)
    #[arg(long, value_name = "NAME", conflicts_with = "scenario")]
    pub preset: Option<String>,
    /// Scenario file whose agents are certified
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    /// Enumeration horizon (at most 6)
    #[arg(long, value_name = "ROUNDS", default_value_t = verify::DEFAULT_TMAX)]
    pub tmax: u64,
    /// Break ties by lowest arm id instead of uniformly at random
    #[arg(long)]
    pub deterministic_ties: bool,
    /// Output directory (default: $SB_OUT, else ./results)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Result JSON files, or directories to scan for them
    #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Figure title
    #[arg(long)]
    pub title: Option<String>,
    /// Output file stem
    #[arg(long, default_value = "plot")]
    pub name: String,
    /// Output directory (default: $SB_OUT, else ./results)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
    #[error("verification failed: the expected certificates were not reproduced")]
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::VerificationFailed => 3,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

/// Runs a parsed command, printing results to stdout and warnings to stderr.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Bound(args) => bound(args),
        Command::Verify(args) => run_verify(args),
        Command::Plot(args) => plot(args),
        Command::Presets => {
            print!("{}", presets_listing());
            Ok(())
        }
    }
}

fn summary(result: &AggregateResult, csv: &Path) -> String {
    format!(
        "{} {}: T={} reps={} final regret {:.2} (sd {:.2}, se {:.2}) -> {}",
        result.scenario,
        result.label,
        result.horizon(),
        result.repetitions(),
        result.final_mean_regret(),
        result.final_std_regret(),
        result.regret_std_error(),
        csv.display()
    )
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut cfg = args.scenario.load()?;
    if let Some(p) = args.policy {
        cfg.policy.kind = p.into();
    }
    let result = run_experiment(&cfg)?;
    let (csv, _) = write_result(&output_dir(args.out.as_deref()), &result)?;
    println!("{}", summary(&result, &csv));
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let cfg = args.scenario.load()?;
    if args.policies.is_empty() && args.replicas.is_empty() {
        return Err(CliError::Usage(
            "sweep needs --policies and/or --replicas".into(),
        ));
    }
    let dir = output_dir(args.out.as_deref());
    let kinds: Vec<PolicyKind> = if args.policies.is_empty() {
        vec![cfg.policy.kind]
    } else {
        args.policies.iter().map(|&p| p.into()).collect()
    };
    let results = if args.replicas.is_empty() {
        sweep(&cfg, &SweepAxis::Policies(kinds))?
    } else {
        let axis = SweepAxis::Replicas {
            agent_id: args.agent,
            counts: args.replicas.clone(),
        };
        let mut all = Vec::new();
        for kind in kinds {
            all.extend(sweep(&cfg.clone().with_policy(kind), &axis)?);
        }
        all
    };
    for result in &results {
        let (csv, _) = write_result(&dir, result)?;
        let mut line = summary(result, &csv);
        if !args.replicas.is_empty() {
            if let Some((m, _, se)) = result.revenue(args.agent) {
                write!(line, "; agent {} revenue {m:.2} (se {se:.2})", args.agent).unwrap();
            }
        }
        println!("{line}");
    }
    Ok(())
}

fn bound(args: BoundArgs) -> Result<(), CliError> {
    let cfg = args.scenario.load()?;
    let instance = cfg.validate()?;
    if cfg.horizon < 2 {
        return Err(CliError::Usage("bounds need T >= 2".into()));
    }
    let gaps = summarize_gaps(&instance);
    let policy = cfg.policy.resolve(&instance, cfg.horizon);
    let l = policy.robust_ratio;
    let h = hucb_bound(&gaps, cfg.horizon);
    let r = rhucb_bound(&gaps, cfg.horizon, l);
    print!(
        "{}",
        render_bounds(&cfg, &gaps, h.value, &h.zero_gap_agents, &r, l)
    );
    if !r.precondition_met {
        eprintln!(
            "warning: L = {l} is below 1/c = {:.4}; the RH-UCB bound assumes L >= 1/c",
            1.0 / gaps.best_fraction
        );
    }
    Ok(())
}

fn render_bounds(
    cfg: &ScenarioConfig,
    gaps: &repbandit_core::GapSummary,
    hucb: f64,
    zero_gap: &[u32],
    r: &RhucbBound,
    l: f64,
) -> String {
    let mut out = String::new();
    writeln!(out, "scenario {} (T = {}, L = {l})", cfg.name, cfg.horizon).unwrap();
    writeln!(out, "mu* = {}", gaps.mu_star).unwrap();
    writeln!(out, "c = {:.6}", gaps.best_fraction).unwrap();
    writeln!(out, "\nagent  best    Delta_i  c_i       internal gaps").unwrap();
    for i in 0..gaps.agent_ids.len() {
        let internal: Vec<String> = gaps.internal_gap[i]
            .iter()
            .map(|d| format!("{d:.4}"))
            .collect();
        writeln!(
            out,
            "{:<6} {:<7.4} {:<8.4} {:<9.6} {}",
            gaps.agent_ids[i],
            gaps.agent_best[i],
            gaps.per_agent_gap[i],
            gaps.agent_best_fraction[i],
            internal.join(" ")
        )
        .unwrap();
    }
    writeln!(out, "\nH-UCB regret bound: {hucb:.4}").unwrap();
    for id in zero_gap {
        writeln!(
            out,
            "  skipped 8 ln T / Delta_i for agent {id} (Delta_i = 0)"
        )
        .unwrap();
    }
    writeln!(
        out,
        "RH-UCB regret bound (leading terms): {:.4} {}",
        r.leading,
        RhucbBound::REMAINDER
    )
    .unwrap();
    writeln!(out, "  = {:.4} + L * {:.4}", r.base, r.per_unit_l).unwrap();
    for s in &r.skipped {
        match s {
            SkippedTerm::AgentGap { agent } => writeln!(
                out,
                "  skipped 4 / Delta_i^2 for agent {agent} (Delta_i = 0)"
            )
            .unwrap(),
            SkippedTerm::InternalGap {
                agent,
                origin_index,
            } => writeln!(
                out,
                "  skipped L / delta for agent {agent}, original {origin_index} (delta = 0)"
            )
            .unwrap(),
        }
    }
    out
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let instance = match (&args.preset, &args.scenario) {
        (Some(name), _) => presets::preset(name)
            .ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?
            .instance()?,
        (None, Some(path)) => ScenarioConfig::from_file(path)?.instance()?,
        (None, None) => toy_instance(),
    };
    let tie = if args.deterministic_ties {
        TieBreak::Lowest
    } else {
        TieBreak::Uniform
    };
    let report: VerifyReport = match verify::verify(&instance, args.tmax, tie) {
        Ok(r) => r,
        Err(e @ (CoreError::TooLarge { .. } | CoreError::InvalidParameter(_))) => {
            return Err(CliError::Usage(format!("cannot enumerate: {e}")))
        }
        Err(e) => return Err(CliError::Config(e.into())),
    };
    let text = report.render();
    print!("{text}");
    let dir = output_dir(args.out.as_deref());
    std::fs::create_dir_all(&dir)
        .map_err(|e| anyhow::anyhow!("creating {}: {e}", dir.display()))?;
    let stem = dir.join(format!("certificate_t{}", args.tmax));
    std::fs::write(stem.with_extension("txt"), &text)
        .map_err(|e| anyhow::anyhow!("writing certificate: {e}"))?;
    let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
    std::fs::write(stem.with_extension("json"), json)
        .map_err(|e| anyhow::anyhow!("writing certificate: {e}"))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json") && !is_certificate(p))
                .collect();
            found.sort();
            files.extend(found);
        } else if path.is_file() {
            files.push(path.clone());
        } else {
            return Err(CliError::Usage(format!(
                "missing input: {}",
                path.display()
            )));
        }
    }
    if files.is_empty() {
        return Err(CliError::Usage("no result files found".into()));
    }
    Ok(files)
}

fn is_certificate(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.starts_with("certificate_"))
}

fn plot(args: PlotArgs) -> Result<(), CliError> {
    let files = collect_inputs(&args.input)?;
    let mut series = Vec::with_capacity(files.len());
    let mut scenarios = Vec::new();
    for file in &files {
        let result = read_result(file).map_err(|e| CliError::Usage(format!("{e:#}")))?;
        if !scenarios.contains(&result.scenario) {
            scenarios.push(result.scenario.clone());
        }
        let mut s = Series::from_result(&result);
        if series.iter().any(|o: &Series| o.label == s.label) {
            s.label = file_stem(&result);
        }
        series.push(s);
    }
    let title = args.title.unwrap_or_else(|| scenarios.join(", "));
    let dir = output_dir(args.out.as_deref());
    std::fs::create_dir_all(&dir)
        .map_err(|e| anyhow::anyhow!("creating {}: {e}", dir.display()))?;
    let svg = dir.join(format!("{}.svg", args.name));
    let csv = dir.join(format!("{}_long.csv", args.name));
    std::fs::write(&svg, render_svg(&title, &series))
        .map_err(|e| anyhow::anyhow!("writing {}: {e}", svg.display()))?;
    std::fs::write(&csv, long_csv(&series))
        .map_err(|e| anyhow::anyhow!("writing {}: {e}", csv.display()))?;
    println!(
        "{} series -> {} and {}",
        series.len(),
        svg.display(),
        csv.display()
    );
    Ok(())
}

pub fn presets_listing() -> String {
    let mut out = String::new();
    for cfg in presets::builtin_presets() {
        let inst = cfg.instance().expect("valid preset");
        let sizes: Vec<String> = (0..inst.n_agents())
            .map(|i| format!("{}:{}", inst.agent_id(i), inst.agent_arms(i).len()))
            .collect();
        writeln!(
            out,
            "{:<6} agents={} arms={} originals={} T={} reps={} |S_i| {}",
            cfg.name,
            inst.n_agents(),
            inst.arm_count(),
            inst.original_count(),
            cfg.horizon,
            cfg.repetitions,
            sizes.join(" ")
        )
        .unwrap();
    }
    out
}
