mod common;

use biasfusion::decision::PolicyTable;
use biasfusion::montecarlo::simulate_sharded;
use biasfusion::{
    exact_error_probability, make_unbiased_system, map_decide, simulate, simulate_policy_comparison, DecisionPolicy,
    OutcomeVector, Prior, SimConfig, SystemSpec,
};

#[test]
fn unbiased_five_channels_near_exact() {
    let system = make_unbiased_system(5, Prior::new(0.6).unwrap(), 0.3).unwrap();
    let config = SimConfig::new(system.clone(), 1_000_000, 2024).unwrap();
    let result = simulate(&config, &DecisionPolicy::map(&system)).unwrap();
    assert!(
        (result.empirical_error - 0.16308).abs() <= 4.0 * result.std_error,
        "{result:?}"
    );
    assert_eq!(result.trials, 1_000_000);
    assert_eq!(result.seed, 2024);
}

#[test]
fn outcome_frequencies_match_marginal() {
    let system = SystemSpec::from_params(0.7, &[0.2, 0.05, 0.4], &[0.1, 0.3, 0.25]).unwrap();
    let trials = 200_000u64;
    let config = SimConfig::new(system.clone(), trials, 5).unwrap();
    let counts = simulate(&config, &DecisionPolicy::map(&system))
        .unwrap()
        .per_outcome_counts
        .unwrap();
    assert_eq!(counts.iter().sum::<u64>(), trials);
    let params = common::params(&system);
    let tv: f64 = counts
        .iter()
        .enumerate()
        .map(|(y, &c)| {
            let p = 0.7 * common::likelihood(&params, y as u64, 0) + 0.3 * common::likelihood(&params, y as u64, 1);
            (c as f64 / trials as f64 - p).abs()
        })
        .sum::<f64>()
        / 2.0;
    let slack = 5.0 * ((1u64 << system.n()) as f64 / trials as f64).sqrt();
    assert!(tv <= slack, "total variation {tv} exceeds {slack}");
}

#[test]
fn map_beats_constant_zero_on_shared_draws() {
    let system = make_unbiased_system(5, Prior::new(0.6).unwrap(), 0.3).unwrap();
    let config = SimConfig::new(system.clone(), 100_000, 9).unwrap();
    let policies = [
        DecisionPolicy::map(&system),
        DecisionPolicy::constant(&system, 0).unwrap(),
    ];
    let results = simulate_policy_comparison(&config, &policies).unwrap();
    assert!(results[0].errors < results[1].errors);
    assert!((results[1].empirical_error - 0.4).abs() <= 4.0 * results[1].std_error);
}

#[test]
fn flipping_ties_changes_nothing_in_expectation() {
    // mirrored channels tie on the outcomes 01 and 10
    let system = SystemSpec::from_params(0.5, &[0.2, 0.4], &[0.4, 0.2]).unwrap();
    let tie = |y: &OutcomeVector| {
        let pair = biasfusion::likelihoods(&system, y).unwrap();
        pair.a == pair.b
    };
    let flipped = PolicyTable::from_fn(2, |y| {
        let y = OutcomeVector::from_index(y, 2);
        if tie(&y) {
            1 - map_decide(&system, &y).unwrap()
        } else {
            map_decide(&system, &y).unwrap()
        }
    })
    .unwrap();
    assert_eq!((0..4).filter(|&y| tie(&OutcomeVector::from_index(y, 2))).count(), 2);
    let policies = [
        DecisionPolicy::map(&system),
        DecisionPolicy::from_table(&system, flipped).unwrap(),
    ];
    let config = SimConfig::new(system.clone(), 100_000, 11).unwrap();
    let results = simulate_policy_comparison(&config, &policies).unwrap();
    let exact = exact_error_probability(&system).unwrap().p_error;
    for r in &results {
        assert!(
            (r.empirical_error - exact).abs() <= 4.0 * r.std_error,
            "{r:?} vs {exact}"
        );
    }
}

#[test]
fn results_do_not_depend_on_sharding() {
    let system = SystemSpec::from_params(0.65, &[0.3, 0.0], &[0.1, 0.5]).unwrap();
    let config = SimConfig::new(system.clone(), 10_001, 3).unwrap();
    let policy = DecisionPolicy::map(&system);
    let whole = simulate_sharded(&config, &policy, 10_001).unwrap();
    for shard in [1, 7, 1024] {
        assert_eq!(simulate_sharded(&config, &policy, shard).unwrap(), whole);
    }
    let other_seed = SimConfig::new(system, 10_001, 4).unwrap();
    assert_ne!(
        simulate(&other_seed, &policy).unwrap().per_outcome_counts,
        whole.per_outcome_counts
    );
}

#[test]
fn rejects_foreign_policy() {
    let a = make_unbiased_system(3, Prior::new(0.6).unwrap(), 0.3).unwrap();
    let b = make_unbiased_system(3, Prior::new(0.6).unwrap(), 0.2).unwrap();
    let config = SimConfig::new(a, 10, 0).unwrap();
    assert!(simulate(&config, &DecisionPolicy::map(&b)).is_err());
}
