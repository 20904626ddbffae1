//! Exact replication certificates for a small instance.

use std::fmt::Write as _;

use repbandit_core::oracle::{proneness_certificate, Certificate, Dominance, Verdict};
use repbandit_core::policy::TieBreak;
use repbandit_core::{build_instance, AgentProfile, Instance, PolicyKind};
use serde::{Deserialize, Serialize};

use crate::config::PolicySpec;

/// Policies checked by [`verify`]: the first must show proneness, the rest
/// must not reward duplication.
pub const CHECKED: [PolicyKind; 4] = [
    PolicyKind::Ucb1,
    PolicyKind::Fair,
    PolicyKind::HUcb,
    PolicyKind::RhUcb,
];

pub const DEFAULT_TMAX: u64 = 4;

/// Two agents with one arm each, means 0.7 and 0.5.
pub fn toy_instance() -> Instance {
    build_instance(&[
        AgentProfile::single(1, 0.7, 1),
        AgentProfile::single(2, 0.5, 1),
    ])
    .expect("valid toy")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tmax: u64,
    pub tie_break: TieBreak,
    pub agents: Vec<AgentProfile>,
    pub certificates: Vec<Certificate>,
    pub passed: bool,
}

pub fn verify(
    instance: &Instance,
    tmax: u64,
    tie_break: TieBreak,
) -> repbandit_core::Result<VerifyReport> {
    let mut certificates = Vec::with_capacity(CHECKED.len());
    for kind in CHECKED {
        let mut spec = PolicySpec::new(kind);
        spec.tie_break = tie_break;
        let config = spec.resolve(instance, tmax.max(2));
        certificates.push(proneness_certificate(instance, &config, tmax)?);
    }
    let passed = certificates[0].shows_proneness()
        && certificates[1..].iter().all(Certificate::shows_proofness);
    Ok(VerifyReport {
        tmax,
        tie_break,
        agents: instance.agents().to_vec(),
        certificates,
        passed,
    })
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Prone => "prone (duplicating strictly dominates)",
        Verdict::Equal => "equal (duplicating changes nothing)",
        Verdict::Proof => "proof (not duplicating dominates)",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn symbol(d: Dominance) -> &'static str {
    match d {
        Dominance::StrictlyDominates => ">",
        Dominance::Dominates => ">=",
        Dominance::Incomparable => "~",
    }
}

impl VerifyReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let ties = match self.tie_break {
            TieBreak::Uniform => "uniform",
            TieBreak::Lowest => "lowest arm id",
        };
        writeln!(
            out,
            "exact enumeration, t_max = {}, ties: {ties}",
            self.tmax
        )
        .unwrap();
        for c in &self.certificates {
            writeln!(out, "\n{} ({} paths)", c.policy.display_name(), c.paths).unwrap();
            for a in &c.agents {
                writeln!(out, "  agent {}: {}", a.agent_id, verdict(a.verdict)).unwrap();
                for r in &a.rounds {
                    writeln!(
                        out,
                        "    t={} replicated {} original  E[N] {:.6} vs {:.6}  max|dF| {:.3e}",
                        r.t,
                        symbol(r.replicated_vs_original),
                        r.replicated_mean,
                        r.original_mean,
                        r.max_cdf_gap
                    )
                    .unwrap();
                }
            }
        }
        writeln!(
            out,
            "\n{}",
            if self.passed {
                "PASS: UCB1 is replication-prone; the other policies do not reward duplication"
            } else {
                "FAIL: the expected certificates were not reproduced"
            }
        )
        .unwrap();
        out
    }
}
