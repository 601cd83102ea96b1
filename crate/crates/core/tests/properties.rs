use optimist_core::{
    batch_simulate, compute_arm_stats, confidence_interval, design_catalog, ecdf_at,
    estimate_nuisances, rejects, rng_stream, BiasKind, CiOptions, NullSpec, SeedSpec, Target,
    Trajectory,
};
use proptest::prelude::*;
use rand::Rng;

fn trajectory(arms: usize, max_len: usize) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec((1..=arms, -1e3f64..1e3), 0..max_len)
        .prop_map(move |pairs| Trajectory::from_pairs(arms, pairs).unwrap())
}

/// Every arm pulled at least twice, outcomes in [0, 1].
fn full_trajectory(arms: usize) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec((1..=arms, 0f64..1.0), 8..40).prop_map(move |mut pairs| {
        for a in 1..=arms {
            pairs.push((a, 0.25));
            pairs.push((a, 0.75));
        }
        Trajectory::from_pairs(arms, pairs).unwrap()
    })
}

fn catalog_index() -> impl Strategy<Value = usize> {
    0..design_catalog().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pulls_sum_to_horizon_and_mass_is_conserved(h in trajectory(4, 200)) {
        let st = compute_arm_stats(&h);
        prop_assert_eq!(st.total_pulls() as usize, h.len());
        let total: f64 = h.records().map(|r| r.outcome).sum();
        let by_arm: f64 = (1..=4)
            .filter_map(|a| Some(st.pulls_of(a) as f64 * st.mean_of(a)?))
            .sum();
        let scale = h.records().map(|r| r.outcome.abs()).sum::<f64>().max(1.0);
        prop_assert!((total - by_arm).abs() <= 1e-12 * scale);
        for a in 1..=4 {
            prop_assert_eq!(st.mean_of(a).is_some(), st.pulls_of(a) > 0);
            prop_assert!(st.varhat_of(a).is_none_or(|v| v >= 0.0));
        }
    }

    #[test]
    fn shuffling_one_arm_keeps_its_stats(h in trajectory(3, 120), seed in any::<u64>()) {
        // permute the outcomes of arm 1 while keeping the arm sequence
        let mut rng = rng_stream(SeedSpec::new(seed, 0));
        let mut xs: Vec<f64> = h.records().filter(|r| r.arm == 1).map(|r| r.outcome).collect();
        for i in (1..xs.len()).rev() {
            xs.swap(i, rng.random_range(0..=i));
        }
        let mut it = xs.into_iter();
        let shuffled = Trajectory::from_pairs(
            3,
            h.records().map(|r| (r.arm, if r.arm == 1 { it.next().unwrap() } else { r.outcome })),
        )
        .unwrap();
        let (a, b) = (compute_arm_stats(&h), compute_arm_stats(&shuffled));
        prop_assert_eq!(&a.pulls, &b.pulls);
        for arm in 1..=3 {
            let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
                (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * x.abs().max(1.0),
                (None, None) => true,
                _ => false,
            };
            prop_assert!(close(a.mean_of(arm), b.mean_of(arm)));
            prop_assert!(close(a.varhat_of(arm), b.varhat_of(arm)));
        }
    }

    #[test]
    fn constant_arm_has_zero_variance(c in -5f64..5.0, n in 1usize..50) {
        let h = Trajectory::from_pairs(2, (0..n).map(|_| (2, c))).unwrap();
        prop_assert_eq!(compute_arm_stats(&h).varhat_of(2), Some(0.0));
    }

    #[test]
    fn replay_is_deterministic(idx in catalog_index(), seed in any::<u64>(), t in 1usize..300) {
        // outcomes come from a fixed table indexed by (round, arm)
        let table: Vec<[f64; 3]> = {
            let mut rng = rng_stream(SeedSpec::new(seed ^ 0xabcd, 1));
            (0..t).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
        };
        let spec = design_catalog()[idx].spec(3).unwrap();
        let run = || {
            let mut state = spec.start(t);
            let mut rng = rng_stream(SeedSpec::new(seed, 0));
            (0..t)
                .map(|i| {
                    let a = state.select_arm(&mut rng).unwrap();
                    state.update(a, table[i][a - 1]);
                    a
                })
                .collect::<Vec<_>>()
        };
        let first = run();
        prop_assert!(first.iter().all(|&a| (1..=3).contains(&a)));
        prop_assert_eq!(first, run());
    }

    #[test]
    fn reject_iff_outside_closed_band(cdf in 0f64..=1.0, alpha in 0.001f64..0.999) {
        let inside = alpha / 2.0 <= cdf && cdf <= 1.0 - alpha / 2.0;
        prop_assert_eq!(rejects(cdf, alpha), !inside);
    }

    #[test]
    fn ecdf_is_a_right_continuous_step(mut xs in prop::collection::vec(-10f64..10.0, 1..60), x in -12f64..12.0) {
        prop_assert_eq!(ecdf_at(&xs, f64::NEG_INFINITY), 0.0);
        prop_assert_eq!(ecdf_at(&xs, f64::INFINITY), 1.0);
        xs.sort_by(f64::total_cmp);
        let f = ecdf_at(&xs, x);
        prop_assert!(ecdf_at(&xs, x + 1e-9) >= f);
        // at a sample point the step is already taken
        let v = xs[xs.len() / 2];
        prop_assert!(ecdf_at(&xs, v) > ecdf_at(&xs, v - 1e-9));
    }

    #[test]
    fn optimism_raises_every_nuisance_mean(h in full_trajectory(3), arm in 1usize..=3) {
        for bias in [BiasKind::Bias1, BiasKind::Bias2, BiasKind::Bias3] {
            let n = estimate_nuisances(&h, Target::ArmMean(arm), bias).unwrap();
            let st = compute_arm_stats(&h);
            for a in 1..=3 {
                if a == arm {
                    prop_assert!(n.biased_mean[a - 1].is_none());
                } else {
                    prop_assert!(n.biased_mean[a - 1].unwrap() > n.raw_mean[a - 1].unwrap());
                }
                prop_assert_eq!(n.varhat[a - 1], st.varhat_of(a));
            }
        }
    }

    #[test]
    fn confidence_set_contains_estimate_and_point(h in full_trajectory(2), seed in any::<u64>(), idx in catalog_index()) {
        let spec = design_catalog()[idx].spec(2).unwrap();
        let opts = CiOptions { replicates: 20, ..CiOptions::default() };
        let grid = optimist_core::linspace(0.0, 1.0, 11);
        let res = confidence_interval(&h, &spec, Target::ArmMean(1), &grid, &opts, SeedSpec::new(seed, 0)).unwrap();
        prop_assert!(res.accepted.contains(&res.observed_stat));
        prop_assert!(res.accepted.contains(&res.point_estimate));
        prop_assert!(res.accepted.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(res.interval, (res.accepted[0], *res.accepted.last().unwrap()));
        prop_assert_eq!(res.per_null.len(), grid.len());
        for o in &res.per_null {
            prop_assert!((0.0..=1.0).contains(&o.cdf_value));
            prop_assert_eq!(o.reject, rejects(o.cdf_value, opts.alpha));
        }
    }
}

#[test]
fn batch_is_independent_of_worker_count() {
    let spec = design_catalog()
        .into_iter()
        .find(|e| e.name == "clipped_ucb")
        .unwrap()
        .spec(3)
        .unwrap();
    let h = Trajectory::from_pairs(3, (0..90).map(|i| (1 + i % 3, (i % 7) as f64 / 7.0))).unwrap();
    let nuis = estimate_nuisances(&h, Target::ArmMean(2), BiasKind::Bias1).unwrap();
    let null = NullSpec::new(Target::ArmMean(2), 0.4);
    let run = |workers: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap()
            .install(|| {
                batch_simulate(&spec, &null, &nuis, 300, 500, SeedSpec::new(77, 3)).unwrap()
            })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one.requested(), 500);
}
