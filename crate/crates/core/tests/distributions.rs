//! Sampling-distribution checks against closed-form laws and Monte Carlo
//! frequency claims.

use optimist_core::{
    batch_simulate, compute_arm_stats, design_catalog, normal_cdf, rng_stream, run_true_experiment,
    simulate_null_trajectory, ArmModel, BiasKind, DesignKind, DesignSpec, Exploration,
    NuisanceVector, NullSpec, SeedSpec, Target,
};
use rand_distr::{Distribution, StandardNormal};

/// Two-sided one-sample Kolmogorov–Smirnov statistic against `cdf`.
fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the KS statistic at level `alpha`.
fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

fn nuisances(
    target: Target,
    biased: Vec<Option<f64>>,
    raw: Vec<Option<f64>>,
    var: Vec<f64>,
) -> NuisanceVector {
    NuisanceVector {
        target,
        biased_mean: biased,
        raw_mean: raw,
        varhat: var.into_iter().map(Some).collect(),
        bias_kind: BiasKind::Bias1,
    }
}

#[test]
fn ks_critical_value_at_1e3() {
    assert!((ks_critical(1, 1e-3) - 1.9495).abs() < 1e-4);
}

#[test]
fn gaussian_stream_passes_ks() {
    let mut rng = rng_stream(SeedSpec::new(2024, 0));
    let xs: Vec<f64> = (0..100_000)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let d = ks_statistic(xs, normal_cdf);
    assert!(d < ks_critical(100_000, 1e-3), "D = {d}");
}

#[test]
fn fixed_uniform_statistic_is_exactly_normal() {
    let design = DesignSpec::new(DesignKind::FixedUniform, 1).unwrap();
    let nuis = nuisances(Target::ArmMean(1), vec![None], vec![Some(0.0)], vec![1.0]);
    let null = NullSpec::new(Target::ArmMean(1), 0.0);
    let out = batch_simulate(&design, &null, &nuis, 100, 100_000, SeedSpec::new(11, 0)).unwrap();
    let d = ks_statistic(out.values(), |x| normal_cdf(x * 10.0));
    assert!(d < ks_critical(100_000, 1e-3), "D = {d}");
}

#[test]
fn deterministic_commit_etc_statistic_is_normal() {
    // Round-robin exploration of T/2 steps, then the target arm always wins the
    // commit, so it is pulled exactly 0.75·T times.
    let t = 400;
    let design = DesignSpec::new(
        DesignKind::Etc {
            explore_fraction: 0.5,
            exploration: Exploration::RoundRobin,
        },
        2,
    )
    .unwrap();
    let (theta0, sd) = (0.5, 0.5);
    let nuis = nuisances(
        Target::ArmMean(1),
        vec![None, Some(theta0 - 10.0 * sd)],
        vec![Some(theta0), Some(theta0 - 10.0 * sd)],
        vec![sd * sd, sd * sd],
    );
    let null = NullSpec::new(Target::ArmMean(1), theta0);
    let out = batch_simulate(&design, &null, &nuis, t, 100_000, SeedSpec::new(12, 0)).unwrap();
    let scale = sd / (0.75 * t as f64).sqrt();
    let d = ks_statistic(out.values(), |x| normal_cdf((x - theta0) / scale));
    assert!(d < ks_critical(100_000, 1e-3), "D = {d}");
}

#[test]
fn etc_target_mean_within_three_sigma() {
    let design = design_catalog()
        .into_iter()
        .find(|e| e.name == "etc")
        .unwrap()
        .spec(2)
        .unwrap();
    let nuis = nuisances(
        Target::ArmMean(1),
        vec![None, Some(0.6)],
        vec![Some(0.5), Some(0.55)],
        vec![0.25, 0.25],
    );
    let null = NullSpec::new(Target::ArmMean(1), 0.5);
    let inside = (0..1000u64)
        .filter(|&s| {
            let h =
                simulate_null_trajectory(&design, &null, &nuis, 100, SeedSpec::new(s, 0)).unwrap();
            let st = compute_arm_stats(&h);
            let n = st.pulls_of(1) as f64;
            (st.mean_of(1).unwrap() - 0.5).abs() <= 3.0 * (0.25 / n).sqrt()
        })
        .count();
    // 99.7% nominal; allow three binomial SEs below it
    assert!(
        inside as f64 >= 1000.0 * (0.997 - 3.0 * (0.997f64 * 0.003 / 1000.0).sqrt()),
        "{inside}"
    );
}

#[test]
fn degenerate_bernoulli_outcomes_are_all_one() {
    let model = ArmModel::bernoulli(vec![1.0, 1.0, 1.0]).unwrap();
    for e in design_catalog() {
        let h = run_true_experiment(&e.spec(3).unwrap(), &model, 50, SeedSpec::new(3, 0)).unwrap();
        assert!(h.records().all(|r| r.outcome == 1.0), "{}", e.name);
    }
}

#[test]
fn clipped_ucb_favors_best_arm() {
    let design = design_catalog()
        .into_iter()
        .find(|e| e.name == "clipped_ucb")
        .unwrap()
        .spec(3)
        .unwrap();
    let model = ArmModel::bernoulli(vec![0.45, 0.5, 0.55]).unwrap();
    let wins = (0..200u64)
        .filter(|&s| {
            let h = run_true_experiment(&design, &model, 1600, SeedSpec::new(s, 0)).unwrap();
            let p = compute_arm_stats(&h).pulls;
            p[2] > p[0] && p[2] > p[1]
        })
        .count();
    assert!(wins >= 160, "arm 3 plurality in {wins}/200");
}

#[test]
fn app_c_etc_commits_evenly_under_equal_arms() {
    let design = design_catalog()
        .into_iter()
        .find(|e| e.name == "etc_appc")
        .unwrap()
        .spec(2)
        .unwrap();
    let model = ArmModel::gaussian(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let n = 10_000u64;
    let first = (0..n)
        .filter(|&s| {
            let h = run_true_experiment(&design, &model, 5000, SeedSpec::new(s, 0)).unwrap();
            let p = compute_arm_stats(&h).pulls;
            assert!(p == [4500, 500] || p == [500, 4500], "{p:?}");
            p[0] == 4500
        })
        .count();
    let f = first as f64 / n as f64;
    assert!((0.47..=0.53).contains(&f), "arm 1 committed in {f}");
}

#[test]
fn every_design_keeps_sampling_every_arm() {
    let model = ArmModel::bernoulli(vec![0.5, 0.5, 0.5]).unwrap();
    for e in design_catalog() {
        let design = e.spec(3).unwrap();
        let mut medians = Vec::new();
        for t in [500, 1000, 2000] {
            let mut mins: Vec<u64> = (0..100u64)
                .map(|s| {
                    let h = run_true_experiment(&design, &model, t, SeedSpec::new(s, 0)).unwrap();
                    *compute_arm_stats(&h).pulls.iter().min().unwrap()
                })
                .collect();
            assert!(
                mins.iter().all(|&m| m >= 1),
                "{} T={t}: an arm was never pulled",
                e.name
            );
            mins.sort_unstable();
            medians.push(mins[50]);
        }
        assert!(
            medians.windows(2).all(|w| w[0] <= w[1]),
            "{}: medians {medians:?}",
            e.name
        );
    }
}
