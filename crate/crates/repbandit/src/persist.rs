//! Result files: a trajectory CSV plus a JSON sidecar holding everything.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::harness::AggregateResult;

/// `--out` if given, else `SB_OUT`, else `./results`.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("SB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

pub fn file_stem(result: &AggregateResult) -> String {
    format!("{}_{}", result.scenario, result.label)
}

/// The CSV view: one row per checkpoint, revenue mean/σ per agent.
pub fn to_csv(result: &AggregateResult) -> String {
    let mut out = String::from("round,mean_regret,std_regret");
    for id in &result.agent_ids {
        write!(out, ",revenue_{id}_mean,revenue_{id}_std").unwrap();
    }
    out.push('\n');
    for (k, t) in result.checkpoints.iter().enumerate() {
        write!(
            out,
            "{t},{},{}",
            result.mean_regret[k], result.std_regret[k]
        )
        .unwrap();
        for (m, s) in result.revenue_mean[k].iter().zip(&result.revenue_std[k]) {
            write!(out, ",{m},{s}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir` and returns both paths.
pub fn write_result(dir: &Path, result: &AggregateResult) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = file_stem(result);
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    fs::write(&csv, to_csv(result)).with_context(|| format!("writing {}", csv.display()))?;
    let body = serde_json::to_string_pretty(result)?;
    fs::write(&json, body).with_context(|| format!("writing {}", json.display()))?;
    Ok((csv, json))
}

pub fn read_result(path: &Path) -> Result<AggregateResult> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
