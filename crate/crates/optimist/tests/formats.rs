use std::path::PathBuf;

use optimist::plan::ExperimentPlan;
use optimist::trajectory_csv::{read_trajectory, write_trajectory};
use optimist_core::Trajectory;
use proptest::prelude::*;

fn plans_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../plans")
}

proptest! {
    #[test]
    fn trajectory_csv_round_trips(
        arms in 1usize..6,
        raw in prop::collection::vec((0usize..6, prop::num::f64::NORMAL | prop::num::f64::ZERO), 0..80),
    ) {
        let h = Trajectory::from_pairs(arms, raw.into_iter().map(|(a, x)| (1 + a % arms, x))).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&h, &mut buf).unwrap();
        let back = read_trajectory(buf.as_slice(), arms, "mem").unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn plan_hash_is_stable_under_reserialization(reps in 1usize..5000, seed in any::<u64>()) {
        let mut plan = ExperimentPlan::load(&plans_dir().join("coverage_desk.plan")).unwrap();
        plan.reps = reps;
        plan.seed = seed;
        let again = ExperimentPlan::from_toml_str(&plan.to_toml()).unwrap();
        prop_assert_eq!(&again, &plan);
        prop_assert_eq!(again.hash(), plan.hash());
    }
}

#[test]
fn shipped_plans_load() {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(plans_dir()).unwrap() {
        let path = entry.unwrap().path();
        let plan =
            ExperimentPlan::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!plan.checks.is_empty(), "{} has no checks", plan.name);
        names.push(plan.name);
    }
    assert!(names.len() >= 5);
}
