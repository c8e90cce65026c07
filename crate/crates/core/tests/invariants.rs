mod common;

use common::random_instance;
use pipeplan::bench::{rows_from_csv, rows_to_csv, run_cell, stat, Cell, ExperimentSpec};
use pipeplan::planning::{build_grouping_task, solve_optimal};
use pipeplan::simulator::{simulate, work_units, CacheState, SimParams};
use pipeplan::strategies::{random_strategy, StrategyKind};
use pipeplan::workload::{generate_pipeline, Topology, WorkloadParams};
use pipeplan::{StrategyWeights, Violation};
use proptest::prelude::*;

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![Just(Topology::Line), Just(Topology::Parallel)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plan_cost_is_objective(seed in any::<u64>(), node in any::<bool>()) {
        let inst = random_instance(seed, 7, 3);
        let w = if node { StrategyWeights::NODE } else { StrategyWeights::CONNECTION };
        let task = build_grouping_task(&inst, w, None).unwrap();
        let plan = solve_optimal(&task).unwrap();
        let cfg = task.plan_to_config(&plan).unwrap();
        prop_assert!(inst.validate_config(&cfg).is_valid());
        prop_assert_eq!(task.plan_cost(&plan).unwrap(), plan.total_cost);
        prop_assert_eq!(inst.objective_cost(&cfg, &w).unwrap(), plan.total_cost);
    }

    #[test]
    fn random_configs_validate(seed in any::<u64>(), inst_seed in 0u64..500) {
        let inst = random_instance(inst_seed, 8, 3);
        let cfg = random_strategy(&inst, seed).unwrap();
        prop_assert!(inst.validate_config(&cfg).is_valid());
    }

    #[test]
    fn dropping_an_operator_is_reported(seed in any::<u64>()) {
        let inst = random_instance(seed, 8, 3);
        let mut cfg = random_strategy(&inst, seed).unwrap();
        let g = cfg.groups.iter().position(|g| !g.operators.is_empty()).unwrap();
        let dropped = cfg.groups[g].operators.pop().unwrap();
        let report = inst.validate_config(&cfg);
        let reported = report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MissingOperator { operator } if *operator == dropped));
        prop_assert!(reported);
    }

    #[test]
    fn setup_decomposes(
        top in topology(),
        special in 1usize..=4,
        seed in 0u64..1000,
        t_pod in 0.0f64..500.0,
        t_pull in 0.0f64..2000.0,
    ) {
        let w = generate_pipeline(&WorkloadParams::new(top, special, 1, seed)).unwrap();
        let cfg = random_strategy(&w.instance, seed).unwrap();
        let sim = SimParams { t_pod, t_pull, ..SimParams::default() };
        let cold = simulate(&cfg, &w, &sim, CacheState::COLD).unwrap();
        let warm = simulate(&cfg, &w, &sim, CacheState::WARM).unwrap();
        let images = cfg.distinct_images().len() as f64;
        let groups = cfg.group_count() as f64;
        prop_assert!((warm.setup_time - t_pod * groups).abs() < 1e-9);
        prop_assert!((cold.setup_time - warm.setup_time - t_pull * images).abs() < 1e-6);
        prop_assert_eq!(cold.execution_time, warm.execution_time);
        prop_assert_eq!(cold.total_time, cold.setup_time + cold.execution_time);
        prop_assert_eq!(cold.terminator_messages, warm.terminator_messages);
    }

    #[test]
    fn cell_rows_round_trip_through_csv(
        top in topology(),
        special in 1usize..=3,
        step in 1u32..=3,
        seed in 0u64..50,
        strategy in prop_oneof![Just(StrategyKind::Connection), Just(StrategyKind::Random), Just(StrategyKind::Default)],
    ) {
        let spec = ExperimentSpec { reps: 3, ..ExperimentSpec::default() };
        let cell = Cell { topology: top, special_ops: special, fib_step: step, seed, strategy };
        let rows = run_cell(&spec, &cell);
        prop_assert_eq!(rows.len(), 3);
        let csv = rows_to_csv(&rows);
        prop_assert_eq!(rows_to_csv(&rows_from_csv(&csv).unwrap()), csv);
        prop_assert_eq!(rows_to_csv(&run_cell(&spec, &cell)), rows_to_csv(&rows));
    }

    #[test]
    fn mean_of_constant_is_constant(v in -1e6f64..1e6, n in 1usize..20) {
        let s = stat(&vec![v; n]).unwrap();
        prop_assert_eq!(s.mean, v);
        if n > 1 {
            prop_assert_eq!(s.std, Some(0.0));
        }
    }

    #[test]
    fn work_units_recurrence(n in 3u32..60) {
        let w = |k| work_units(k).unwrap();
        prop_assert_eq!(w(n), w(n - 1) + w(n - 2) + 1);
    }
}
