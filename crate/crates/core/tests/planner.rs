mod common;

use common::random_instance;
use pipeplan::planning::{
    brute_force_grouping, build_grouping_task, solve_optimal, solve_with, SearchOptions,
};
use pipeplan::StrategyWeights;

const PROFILES: [StrategyWeights; 2] = [StrategyWeights::CONNECTION, StrategyWeights::NODE];

#[test]
fn search_matches_brute_force() {
    for seed in 0..120 {
        let inst = random_instance(seed, 8, 3);
        for w in PROFILES {
            let (oracle_cfg, oracle_cost) = brute_force_grouping(&inst, &w).unwrap();
            let task = build_grouping_task(&inst, w, None).unwrap();
            let plan = solve_optimal(&task).unwrap();
            assert_eq!(plan.total_cost, oracle_cost, "seed {seed} weights {w:?}");
            assert_eq!(inst.objective_cost(&oracle_cfg, &w).unwrap(), oracle_cost);
        }
    }
}

#[test]
fn lower_bound_preserves_optimum_and_prunes() {
    let mut plain_total = 0;
    let mut bounded_total = 0;
    for seed in 0..40 {
        let inst = random_instance(seed, 8, 3);
        for w in PROFILES {
            let task = build_grouping_task(&inst, w, None).unwrap();
            let plain = solve_with(&task, SearchOptions::default()).unwrap();
            let bounded = solve_with(&task, SearchOptions { lower_bound: true }).unwrap();
            assert_eq!(
                plain.plan.total_cost, bounded.plan.total_cost,
                "seed {seed}"
            );
            plain_total += plain.expanded;
            bounded_total += bounded.expanded;
        }
    }
    assert!(bounded_total <= plain_total);
}

#[test]
fn ground_formalism_agrees_with_search_semantics() {
    for seed in 0..30 {
        let inst = random_instance(seed, 6, 3);
        for w in PROFILES {
            let task = build_grouping_task(&inst, w, None).unwrap();
            let plan = solve_optimal(&task).unwrap();
            assert_eq!(
                task.formal_plan_cost(&plan).unwrap(),
                plan.total_cost,
                "seed {seed}"
            );
        }
    }
}

#[test]
fn config_to_plan_is_inverse() {
    for seed in 0..30 {
        let inst = random_instance(seed, 8, 3);
        let task = build_grouping_task(&inst, StrategyWeights::CONNECTION, None).unwrap();
        let plan = solve_optimal(&task).unwrap();
        let cfg = task.plan_to_config(&plan).unwrap();
        let again = task.config_to_plan(&cfg).unwrap();
        assert_eq!(again.total_cost, plan.total_cost);
        assert_eq!(
            task.plan_to_config(&again).unwrap().canonical(),
            cfg.canonical()
        );
    }
}
