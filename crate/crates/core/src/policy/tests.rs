use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::model::{build_instance, AgentProfile};
use crate::random::SeededSource;

/// Replays scripted choices and records every draw request.
struct Stub {
    picks: Vec<usize>,
    requests: Vec<(Stream, usize)>,
    reward: bool,
}

impl Stub {
    fn new(picks: &[usize]) -> Self {
        Self {
            picks: picks.iter().rev().copied().collect(),
            requests: Vec::new(),
            reward: true,
        }
    }
}

impl RandomSource for Stub {
    fn pick(&mut self, stream: Stream, len: usize) -> usize {
        self.requests.push((stream, len));
        self.picks.pop().unwrap_or(0) % len
    }

    fn bernoulli(&mut self, _p: f64) -> bool {
        self.reward
    }
}

fn singles(means: &[f64]) -> Instance {
    let profiles: Vec<AgentProfile> = means
        .iter()
        .enumerate()
        .map(|(i, &m)| AgentProfile::single(i as u32 + 1, m, 1))
        .collect();
    build_instance(&profiles).unwrap()
}

#[test]
fn ucb1_initialization_is_a_uniform_draw_over_unexplored_arms() {
    let inst = singles(&[0.5, 0.5, 0.5]);
    let mut chosen = Vec::new();
    for k in 0..3 {
        let mut stub = Stub::new(&[k]);
        let mut p = Policy::new(&inst, PolicyConfig::new(PolicyKind::Ucb1, 10), &mut stub).unwrap();
        chosen.push(p.select(&mut stub).unwrap().arm);
        assert_eq!(stub.requests, vec![(Stream::Arm, 3)]);
    }
    chosen.sort_unstable();
    assert_eq!(chosen, vec![0, 1, 2]);
}

#[test]
fn ucb1_tie_between_identical_arms_is_a_fair_coin() {
    let inst = singles(&[0.5, 0.5]);
    let mut outcomes = Vec::new();
    for k in 0..2 {
        // Explore both arms (rewards 1; the second needs no draw), then a tied round.
        let mut stub = Stub::new(&[0, k]);
        let mut p = Policy::new(&inst, PolicyConfig::new(PolicyKind::Ucb1, 10), &mut stub).unwrap();
        for _ in 0..2 {
            let s = p.select(&mut stub).unwrap();
            p.update(s.arm, 1).unwrap();
        }
        stub.requests.clear();
        outcomes.push(p.select(&mut stub).unwrap().arm);
        assert_eq!(stub.requests, vec![(Stream::Arm, 2)]);
    }
    assert_ne!(outcomes[0], outcomes[1]);
}

#[test]
fn fair_draws_agents_uniformly() {
    // 1e5 Bernoulli(0.2) trials: 3 sigma of the frequency is 0.0038.
    let inst = singles(&[0.5, 0.6, 0.7, 0.8, 0.9]);
    let mut rng = SeededSource::new(42);
    let mut counts = [0u32; 5];
    run_episode(
        &inst,
        &PolicyConfig::new(PolicyKind::Fair, 100_000),
        &mut rng,
        |r| counts[r.agent] += 1,
    )
    .unwrap();
    for c in counts {
        assert!((f64::from(c) / 1e5 - 0.2).abs() <= 0.004, "{counts:?}");
    }
}

#[test]
fn fair_single_arm_agent_always_plays_that_arm() {
    let profiles = vec![
        AgentProfile::single(1, 0.3, 1),
        AgentProfile::single(2, 0.6, 4),
    ];
    let inst = build_instance(&profiles).unwrap();
    let mut rng = SeededSource::new(1);
    run_episode(
        &inst,
        &PolicyConfig::new(PolicyKind::Fair, 500),
        &mut rng,
        |r| {
            if r.agent == 0 {
                assert_eq!(r.arm, 0);
            }
        },
    )
    .unwrap();
}

#[test]
fn fair_regret_is_linear_with_a_useless_agent() {
    let inst = singles(&[1.0, 0.0]);
    let mut rng = SeededSource::new(8);
    let mut bad = 0u32;
    let t = 20_000;
    run_episode(
        &inst,
        &PolicyConfig::new(PolicyKind::Fair, t),
        &mut rng,
        |r| bad += u32::from(r.agent == 1),
    )
    .unwrap();
    // Regret = number of pulls of the zero arm ~ Binomial(t, 1/2).
    let slope = f64::from(bad) / t as f64;
    assert!(
        (slope - 0.5).abs() < 3.0 * (0.25 / t as f64).sqrt() + 1e-3,
        "{slope}"
    );
}

#[test]
fn sucb_subsample_sizes() {
    let inst = singles(&[0.1, 0.2, 0.3, 0.4, 0.5]);
    let mut rng = SeededSource::new(0);
    // l ln T = 10 > |S| = 5.
    let t = libm::exp(10.0) as u64 + 1;
    assert_eq!(sucb_init(&inst, 1.0, t, &mut rng).len(), 5);

    let mut profiles = vec![AgentProfile::single(1, 0.5, 5001)];
    for (i, m) in [0.6, 0.7, 0.8, 0.9].into_iter().enumerate() {
        profiles.push(AgentProfile::single(i as u32 + 2, m, 1));
    }
    let inst = build_instance(&profiles).unwrap();
    assert_eq!(inst.arm_count(), 5005);
    let mut sample = sucb_init(&inst, 15.0, 10_000, &mut rng);
    assert_eq!(sample.len(), 139);
    sample.sort_unstable();
    sample.dedup();
    assert_eq!(sample.len(), 139);
}

#[test]
fn rhucb_subsample_sizes() {
    let inst = build_instance(&[
        AgentProfile::single(1, 0.5, 2000),
        AgentProfile::single(2, 0.4, 7),
    ])
    .unwrap();
    let mut rng = SeededSource::new(0);
    let horizon = libm::exp(10.0) as u64; // ln T just below 10
    let b = rhucb_init(&inst, 3.0, horizon, &mut rng);
    assert_eq!(b[0].len(), 30);
    assert!(b[0].iter().all(|a| inst.agent_arms(0).contains(a)));
    assert_eq!(b[1], (2000..2007).collect::<Vec<_>>());
}

#[test]
fn hucb_first_round_draws_among_all_agents() {
    let inst = singles(&[0.2, 0.4, 0.6]);
    for k in 0..3 {
        let mut stub = Stub::new(&[k]);
        let mut p = Policy::new(&inst, PolicyConfig::new(PolicyKind::HUcb, 10), &mut stub).unwrap();
        assert_eq!(p.select(&mut stub).unwrap().agent, k);
        assert_eq!(stub.requests, vec![(Stream::Agent, 3)]);
    }
}

#[test]
fn hucb_initialization_visits_each_agent_once() {
    let profiles = vec![
        AgentProfile::single(1, 0.2, 50),
        AgentProfile::new(2, &[0.4, 0.1], &[3, 3]),
        AgentProfile::single(3, 0.9, 1),
    ];
    let inst = build_instance(&profiles).unwrap();
    for kind in [PolicyKind::HUcb, PolicyKind::RhUcb, PolicyKind::PrhUcb] {
        let mut rng = SeededSource::new(5);
        let mut agents = Vec::new();
        run_episode(&inst, &PolicyConfig::new(kind, 3), &mut rng, |r| {
            agents.push(r.agent)
        })
        .unwrap();
        agents.sort_unstable();
        assert_eq!(agents, vec![0, 1, 2], "{kind}");
    }
}

#[test]
fn hucb_phase_two_degenerate_with_one_arm() {
    let inst = build_instance(&[
        AgentProfile::single(1, 0.5, 1),
        AgentProfile::single(2, 0.5, 3),
    ])
    .unwrap();
    let mut rng = SeededSource::new(2);
    run_episode(
        &inst,
        &PolicyConfig::new(PolicyKind::HUcb, 200),
        &mut rng,
        |r| {
            if r.agent == 0 {
                assert_eq!(r.arm, 0);
            }
        },
    )
    .unwrap();
}

#[test]
fn rhucb_never_leaves_its_subsample() {
    let profiles = vec![
        AgentProfile::new(1, &[0.9, 0.2], &[40, 40]),
        AgentProfile::single(2, 0.6, 100),
    ];
    let inst = build_instance(&profiles).unwrap();
    let config = PolicyConfig::new(PolicyKind::RhUcb, 3000).with_robust_ratio(1.0);
    let mut rng = SeededSource::new(3);
    let mut pulled = Vec::new();
    let policy = run_episode(&inst, &config, &mut rng, |r| pulled.push(r.arm)).unwrap();
    let allowed: Vec<ArmId> = (0..2).flat_map(|i| policy.candidate_arms(i)).collect();
    assert_eq!(allowed.len(), 2 * subsample_size(80, 1.0, 3000));
    assert!(pulled.iter().all(|a| allowed.contains(a)));
}

#[test]
fn rhucb_singleton_subsample() {
    let inst = build_instance(&[
        AgentProfile::single(1, 0.5, 50),
        AgentProfile::single(2, 0.7, 1),
    ])
    .unwrap();
    // ceil(0.1 ln 100) = 1
    let config = PolicyConfig::new(PolicyKind::RhUcb, 100).with_robust_ratio(0.1);
    let mut rng = SeededSource::new(4);
    let mut arms = Vec::new();
    let policy = run_episode(&inst, &config, &mut rng, |r| {
        if r.agent == 0 {
            arms.push(r.arm)
        }
    })
    .unwrap();
    let b = policy.candidate_arms(0);
    assert_eq!(b.len(), 1);
    assert!(arms.iter().all(|&a| a == b[0]));
}

#[test]
fn prhucb_single_arm_agent() {
    let inst = build_instance(&[
        AgentProfile::single(1, 0.5, 1),
        AgentProfile::single(2, 0.4, 20),
    ])
    .unwrap();
    let mut rng = SeededSource::new(6);
    let p = run_episode(
        &inst,
        &PolicyConfig::new(PolicyKind::PrhUcb, 500),
        &mut rng,
        |r| {
            if r.agent == 0 {
                assert_eq!(r.arm, 0);
            }
        },
    )
    .unwrap();
    assert_eq!(p.candidate_arms(0), vec![0]);
}

#[test]
fn prhucb_subsample_growth_is_bounded() {
    let inst = build_instance(&[
        AgentProfile::new(1, &[0.8, 0.3], &[100, 100]),
        AgentProfile::single(2, 0.6, 300),
    ])
    .unwrap();
    let mut rng = SeededSource::new(7);
    let mut p = Policy::new(&inst, PolicyConfig::new(PolicyKind::PrhUcb, 5000), &mut rng).unwrap();
    let mut prev = [0usize; 2];
    for t in 1..=5000u64 {
        let s = p.select(&mut rng).unwrap();
        let r = draw_reward(&inst.arms()[s.arm], &mut rng);
        p.update(s.arm, r).unwrap();
        let ln_t = ln_clock(t as f64);
        for i in 0..2 {
            let b = p.subsample_len(i);
            assert!(b >= prev[i]);
            let cap = (inst.agent_arms(i).len() as f64).min(libm::ceil(ln_t * ln_t)) as usize;
            if p.agent_stats(i).count > 0 {
                assert!(
                    b >= 1 && b <= cap.max(1),
                    "t={t} agent={i} |B|={b} cap={cap}"
                );
            }
            prev[i] = b;
        }
    }
    // ln^2(5000) ~ 72.5
    assert_eq!(p.subsample_len(0), 73);
}

#[test]
fn update_recurrences() {
    let inst = singles(&[0.5]);
    let mut rng = SeededSource::new(0);
    let mut p = Policy::new(&inst, PolicyConfig::new(PolicyKind::HUcb, 10), &mut rng).unwrap();
    let s = p.select(&mut rng).unwrap();
    p.update(s.arm, 1).unwrap();
    assert_eq!(
        p.arm_stats(0),
        ArmStats {
            count: 1,
            mean: 1.0
        }
    );
    let s = p.select(&mut rng).unwrap();
    p.update(s.arm, 0).unwrap();
    assert_eq!(p.arm_stats(0).mean, 0.5);
    let s = p.select(&mut rng).unwrap();
    p.update(s.arm, 1).unwrap();
    assert_eq!(p.arm_stats(0).count, 3);
    assert!((p.arm_stats(0).mean - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(p.agent_stats(0).count, 3);
    assert_eq!(p.round(), 3);
}

#[test]
fn update_errors() {
    let inst = singles(&[0.5, 0.6]);
    let mut rng = SeededSource::new(0);
    let mut p = Policy::new(&inst, PolicyConfig::new(PolicyKind::Ucb1, 10), &mut rng).unwrap();
    assert_eq!(p.update(0, 1), Err(Error::StaleUpdate));
    let s = p.select(&mut rng).unwrap();
    assert_eq!(p.select(&mut rng), Err(Error::PendingSelection));
    let other = 1 - s.arm;
    assert!(matches!(p.update(other, 1), Err(Error::WrongArm { .. })));
    p.update(s.arm, 1).unwrap();
    assert_eq!(p.update(s.arm, 1), Err(Error::StaleUpdate));
}

#[test]
fn config_validation() {
    let inst = singles(&[0.5]);
    let mut rng = SeededSource::new(0);
    for bad in [
        PolicyConfig::new(PolicyKind::RhUcb, 100).with_robust_ratio(0.0),
        PolicyConfig::new(PolicyKind::SUcb, 100).with_sample_ratio(-1.0),
        PolicyConfig::new(PolicyKind::RhUcb, 1),
        PolicyConfig::new(PolicyKind::Ucb1, 0),
    ] {
        assert!(Policy::new(&inst, bad, &mut rng).is_err());
    }
}

#[test]
fn policy_tags_round_trip() {
    for k in PolicyKind::ALL {
        assert_eq!(k.tag().parse::<PolicyKind>().unwrap(), k);
    }
    assert!("klucb".parse::<PolicyKind>().is_err());
}
