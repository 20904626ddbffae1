use repbandit::harness::{run_experiment, sweep, SweepAxis};
use repbandit::presets;
use repbandit_core::PolicyKind;

#[test]
fn doubling_repetitions_shrinks_the_interval_by_root_two() {
    let base = presets::fig1(1)
        .with_policy(PolicyKind::Ucb1)
        .with_horizon(2_000);
    let a = run_experiment(&base.clone().with_repetitions(200)).unwrap();
    let b = run_experiment(&base.with_repetitions(400)).unwrap();
    let ratio = b.regret_std_error() / a.regret_std_error();
    let expected = std::f64::consts::FRAC_1_SQRT_2;
    assert!((ratio / expected - 1.0).abs() <= 0.2, "ratio {ratio}");
}

#[test]
fn replication_inflates_ucb1_regret() {
    let plain = run_experiment(
        &presets::fig1(1)
            .with_policy(PolicyKind::Ucb1)
            .with_horizon(10_000)
            .with_repetitions(20),
    )
    .unwrap();
    let replicated = run_experiment(
        &presets::fig2a()
            .with_policy(PolicyKind::Ucb1)
            .with_horizon(10_000)
            .with_repetitions(20),
    )
    .unwrap();
    assert!(
        replicated.final_mean_regret() >= 5.0 * plain.final_mean_regret(),
        "{} vs {}",
        replicated.final_mean_regret(),
        plain.final_mean_regret()
    );
}

#[test]
fn ucb1_utility_grows_with_replicas() {
    let base = presets::fig1(1)
        .with_policy(PolicyKind::Ucb1)
        .with_horizon(5_000)
        .with_repetitions(20);
    let results = sweep(
        &base,
        &SweepAxis::Replicas {
            agent_id: 1,
            counts: vec![1, 10, 100],
        },
    )
    .unwrap();
    let utility: Vec<f64> = results
        .iter()
        .map(|r| r.utility[r.agent_index(1).unwrap()].mean)
        .collect();
    assert!(utility.windows(2).all(|w| w[0] < w[1]), "{utility:?}");
}

#[test]
fn revenue_and_regret_account_for_every_round() {
    // E[sum of rewards] + E[pseudo-regret] = T mu* under undiscounted revenue.
    let horizon = 5_000u64;
    for kind in PolicyKind::ALL {
        let r = run_experiment(
            &presets::fig2c()
                .with_policy(kind)
                .with_horizon(horizon)
                .with_repetitions(30),
        )
        .unwrap();
        let totals: Vec<f64> = r
            .final_revenue
            .iter()
            .zip(&r.final_regret)
            .map(|(rev, reg)| rev.iter().sum::<f64>() + reg)
            .collect();
        let mean = totals.iter().sum::<f64>() / totals.len() as f64;
        // Each round adds at most variance 1/4 around its expectation.
        let se = (horizon as f64 * 0.25 / totals.len() as f64).sqrt();
        let target = horizon as f64 * 0.9;
        assert!(
            (mean - target).abs() <= 4.0 * se,
            "{kind}: {mean} vs {target}"
        );
    }
}
