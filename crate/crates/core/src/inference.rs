//! Optimistic nuisance estimation, point-null testing by resimulation, and
//! confidence intervals by test inversion.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::designs::DesignSpec;
use crate::error::{Error, Result};
use crate::math;
use crate::rng::SeedSpec;
use crate::simulator::{batch_simulate, NullSpec, Target};
use crate::trajectory::{compute_arm_stats, ArmStats, Trajectory};

/// The optimistic bias `ε_a` added to each nuisance arm mean, as a function of
/// that arm's pull count `N`.
#[derive(Debug, Clone, Copy)]
pub enum BiasKind {
    /// `ln ln N / √N`.
    Bias1,
    /// `ln N / √N`.
    Bias2,
    /// Constant `1`.
    Bias3,
    /// No bias at all. Does not control type I error; kept as a contrast.
    PlugIn,
    /// User-supplied `ε(N)`; must be strictly positive and finite.
    Custom(fn(u64) -> f64),
}

/// Pull counts at or below this use `ε = 1` under `Bias1`/`Bias2`, where
/// `ln ln N` is undefined or not meaningfully positive.
pub const SMALL_N_FALLBACK: u64 = 3;

impl BiasKind {
    pub fn epsilon(&self, pulls: u64) -> f64 {
        let n = pulls as f64;
        match self {
            BiasKind::Bias1 if pulls > SMALL_N_FALLBACK => math::ln(math::ln(n)) / math::sqrt(n),
            BiasKind::Bias2 if pulls > SMALL_N_FALLBACK => math::ln(n) / math::sqrt(n),
            BiasKind::Bias1 | BiasKind::Bias2 | BiasKind::Bias3 => 1.0,
            BiasKind::PlugIn => 0.0,
            BiasKind::Custom(f) => f(pulls),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BiasKind::Bias1 => "bias1",
            BiasKind::Bias2 => "bias2",
            BiasKind::Bias3 => "bias3",
            BiasKind::PlugIn => "plugin",
            BiasKind::Custom(_) => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<BiasKind> {
        Some(match name {
            "bias1" => BiasKind::Bias1,
            "bias2" => BiasKind::Bias2,
            "bias3" => BiasKind::Bias3,
            "plugin" | "plug_in" | "plug-in" => BiasKind::PlugIn,
            _ => return None,
        })
    }
}

impl PartialEq for BiasKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (BiasKind::Custom(a), BiasKind::Custom(b)) => core::ptr::fn_addr_eq(*a, *b),
            _ => core::mem::discriminant(self) == core::mem::discriminant(other),
        }
    }
}

impl fmt::Display for BiasKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Nuisance parameters for resimulation: optimistic means of every arm except the
/// statistic arm, and plug-in variances of all arms.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceVector {
    pub target: Target,
    /// `μ̂_T(a) + ε_a`; `None` for the statistic arm, whose mean is set by the null.
    pub biased_mean: Vec<Option<f64>>,
    pub raw_mean: Vec<Option<f64>>,
    pub varhat: Vec<Option<f64>>,
    pub bias_kind: BiasKind,
}

impl NuisanceVector {
    pub fn arms(&self) -> usize {
        self.varhat.len()
    }

    /// `ε_a` for a nuisance arm (1-based).
    pub fn epsilon(&self, arm: usize) -> Option<f64> {
        Some(self.biased_mean[arm - 1]? - self.raw_mean[arm - 1]?)
    }
}

fn nuisances_from_stats(
    stats: &ArmStats,
    target: Target,
    bias_kind: BiasKind,
) -> Result<NuisanceVector> {
    target.validate(stats.arms())?;
    let stat = target.stat_arm();
    let mut biased_mean = Vec::with_capacity(stats.arms());
    for a in 1..=stats.arms() {
        let n = stats.pulls_of(a);
        if n == 0 {
            return Err(Error::InsufficientData {
                arm: a,
                pulls: 0,
                needed: 1,
            });
        }
        if a == stat {
            biased_mean.push(None);
            continue;
        }
        let eps = bias_kind.epsilon(n);
        if !(eps.is_finite() && eps >= 0.0) || (eps == 0.0 && bias_kind != BiasKind::PlugIn) {
            return Err(Error::Config(format!(
                "bias function returned ε = {eps} for N = {n}; it must be positive and finite"
            )));
        }
        biased_mean.push(stats.mean_of(a).map(|m| m + eps));
    }
    Ok(NuisanceVector {
        target,
        biased_mean,
        raw_mean: stats.mean.clone(),
        varhat: stats.varhat.clone(),
        bias_kind,
    })
}

/// Estimates the nuisance vector from the observed data.
///
/// Every arm must have been pulled at least once.
pub fn estimate_nuisances(
    h: &Trajectory,
    target: Target,
    bias_kind: BiasKind,
) -> Result<NuisanceVector> {
    nuisances_from_stats(&compute_arm_stats(h), target, bias_kind)
}

/// Numerical check of a bias function against the law-of-iterated-logarithm scale.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasRateReport {
    /// `(N, √(ln ln N / N) / ε(N))` on a log-spaced grid.
    pub ratios: Vec<(u64, f64)>,
    pub decreasing: bool,
    pub top_ratio: f64,
    pub pass: bool,
}

/// Largest ratio accepted at the top of the range.
pub const BIAS_RATE_TOP_LIMIT: f64 = 1.0;

/// Checks that `√(ln ln N / N) / ε(N)` decreases strictly over `[n_lo, n_hi]` and
/// ends below [`BIAS_RATE_TOP_LIMIT`].
pub fn validate_bias_rate(bias: BiasKind, n_lo: u64, n_hi: u64) -> BiasRateReport {
    const POINTS: usize = 41;
    let (lo, hi) = (n_lo.max(16) as f64, n_hi.max(n_lo.max(16) + 1) as f64);
    let mut ratios: Vec<(u64, f64)> = Vec::with_capacity(POINTS);
    for i in 0..POINTS {
        let frac = i as f64 / (POINTS - 1) as f64;
        let n = libm::round(libm::exp(
            math::ln(lo) + frac * (math::ln(hi) - math::ln(lo)),
        )) as u64;
        if ratios.last().is_some_and(|&(prev, _)| prev == n) {
            continue;
        }
        let x = n as f64;
        let eps = bias.epsilon(n);
        let r = if eps > 0.0 && eps.is_finite() {
            math::sqrt(math::ln(math::ln(x)) / x) / eps
        } else {
            f64::INFINITY
        };
        ratios.push((n, r));
    }
    let decreasing = ratios.windows(2).all(|w| w[1].1 < w[0].1);
    let top_ratio = ratios.last().map_or(f64::INFINITY, |r| r.1);
    BiasRateReport {
        pass: decreasing && top_ratio < BIAS_RATE_TOP_LIMIT,
        ratios,
        decreasing,
        top_ratio,
    }
}

/// Result of one point-null test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub theta0: f64,
    pub reject: bool,
    /// `F̂(ρ(H_T))`: fraction of simulated statistics `≤` the observed one.
    pub cdf_value: f64,
    pub observed_stat: f64,
    pub alpha: f64,
    /// Replicates that entered `F̂` after exclusions.
    pub b_effective: usize,
    pub excluded: usize,
}

impl TestOutcome {
    /// Two-sided p-value derived from the CDF value, `min(1, 2·min(F̂, 1 − F̂))`.
    pub fn two_sided_p(&self) -> f64 {
        (2.0 * self.cdf_value.min(1.0 - self.cdf_value)).min(1.0)
    }
}

/// Whether `cdf_value` falls outside the closed acceptance band `[α/2, 1 − α/2]`.
#[inline]
pub fn rejects(cdf_value: f64, alpha: f64) -> bool {
    cdf_value < alpha / 2.0 || cdf_value > 1.0 - alpha / 2.0
}

/// Empirical CDF of `values` at `x`, using `≤`.
pub fn ecdf_at(values: &[f64], x: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().filter(|&&v| v <= x).count() as f64 / values.len() as f64
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("α must be in (0,1), got {alpha}")))
    }
}

fn check_design(h: &Trajectory, design: &DesignSpec) -> Result<()> {
    if h.arms() != design.arms() {
        return Err(Error::Config(format!(
            "trajectory has {} arms, design has {}",
            h.arms(),
            design.arms()
        )));
    }
    Ok(())
}

/// Everything a test needs that does not depend on `θ₀`.
struct Prepared {
    observed_stat: f64,
    nuisances: NuisanceVector,
    horizon: usize,
}

fn prepare(
    h: &Trajectory,
    design: &DesignSpec,
    target: Target,
    bias: BiasKind,
) -> Result<(Prepared, ArmStats)> {
    check_design(h, design)?;
    target.validate(h.arms())?;
    let stats = compute_arm_stats(h);
    let stat = target.stat_arm();
    let observed_stat = stats.mean_of(stat).ok_or(Error::InsufficientData {
        arm: stat,
        pulls: 0,
        needed: 1,
    })?;
    let nuisances = nuisances_from_stats(&stats, target, bias)?;
    Ok((
        Prepared {
            observed_stat,
            nuisances,
            horizon: h.len(),
        },
        stats,
    ))
}

fn run_test(
    prep: &Prepared,
    design: &DesignSpec,
    null: &NullSpec,
    alpha: f64,
    replicates: usize,
    seed: SeedSpec,
) -> Result<TestOutcome> {
    let batch = batch_simulate(
        design,
        null,
        &prep.nuisances,
        prep.horizon,
        replicates,
        seed,
    )?;
    let excluded = batch.excluded();
    // abort when more than 1% of replicates are undefined
    if excluded * 100 > replicates {
        return Err(Error::ExcessiveExclusions {
            excluded,
            total: replicates,
        });
    }
    let values = batch.values();
    let cdf_value = ecdf_at(&values, prep.observed_stat);
    Ok(TestOutcome {
        theta0: null.theta0,
        reject: rejects(cdf_value, alpha),
        cdf_value,
        observed_stat: prep.observed_stat,
        alpha,
        b_effective: values.len(),
        excluded,
    })
}

/// Tests `θ = θ₀` by resimulating the experiment `replicates` times with
/// optimistic nuisances.
pub fn test_point_null(
    h: &Trajectory,
    design: &DesignSpec,
    null: &NullSpec,
    alpha: f64,
    replicates: usize,
    bias: BiasKind,
    seed: SeedSpec,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let (prep, _) = prepare(h, design, null.target, bias)?;
    run_test(&prep, design, null, alpha, replicates, seed)
}

/// How random streams are assigned to the nulls of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedMode {
    /// Every null reuses streams `0..B` (common random numbers).
    #[default]
    Common,
    /// Null `g` uses streams `g·B..(g+1)·B`.
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiOptions {
    pub alpha: f64,
    pub replicates: usize,
    pub bias: BiasKind,
    pub seed_mode: SeedMode,
}

impl Default for CiOptions {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            replicates: 200,
            bias: BiasKind::Bias1,
            seed_mode: SeedMode::Common,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceResult {
    pub target: Target,
    /// Level used for each grid test.
    pub alpha: f64,
    /// Level spent on an external bounding interval, when one was used.
    pub alpha_bound: Option<f64>,
    /// Sample mean of the statistic arm.
    pub observed_stat: f64,
    /// Plug-in estimate of the target; always part of the confidence set.
    pub empirical_estimate: f64,
    pub grid: Vec<f64>,
    /// One outcome per grid value, in grid order.
    pub per_null: Vec<TestOutcome>,
    /// Non-rejected grid values plus the empirical estimate, sorted.
    pub accepted: Vec<f64>,
    pub interval: (f64, f64),
    pub point_estimate: f64,
    /// Whether the non-rejected grid values form one unbroken run of the grid.
    pub contiguous: bool,
}

impl ConfidenceResult {
    pub fn width(&self) -> f64 {
        self.interval.1 - self.interval.0
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.interval.0 <= theta && theta <= self.interval.1
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn empirical_estimate(stats: &ArmStats, target: Target) -> Option<f64> {
    match target {
        Target::ArmMean(a) => stats.mean_of(a),
        Target::DiffMeans { arm, other } => Some(stats.mean_of(arm)? - stats.mean_of(other)?),
    }
}

/// Confidence set by inverting the point-null test over `grid`, with the point
/// estimate chosen as the accepted null whose CDF value is closest to 1/2.
pub fn confidence_interval(
    h: &Trajectory,
    design: &DesignSpec,
    target: Target,
    grid: &[f64],
    opts: &CiOptions,
    seed: SeedSpec,
) -> Result<ConfidenceResult> {
    check_alpha(opts.alpha)?;
    if grid.is_empty() {
        return Err(Error::Config("null grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("null grid must be finite and sorted".into()));
    }
    let (prep, stats) = prepare(h, design, target, opts.bias)?;
    let estimate = empirical_estimate(&stats, target).expect("all arms pulled after prepare");

    let one = |g: usize| {
        let stream0 = match opts.seed_mode {
            SeedMode::Common => seed.stream_id,
            SeedMode::Disjoint => seed
                .stream_id
                .wrapping_add((g as u64).wrapping_mul(opts.replicates as u64)),
        };
        let null = NullSpec::new(target, grid[g]);
        run_test(
            &prep,
            design,
            &null,
            opts.alpha,
            opts.replicates,
            seed.with_stream(stream0),
        )
    };
    #[cfg(feature = "std")]
    let per_null: Vec<TestOutcome> = {
        use rayon::prelude::*;
        (0..grid.len())
            .into_par_iter()
            .map(one)
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "std"))]
    let per_null: Vec<TestOutcome> = (0..grid.len()).map(one).collect::<Result<_>>()?;

    let kept: Vec<usize> = (0..grid.len()).filter(|&g| !per_null[g].reject).collect();
    let contiguous = kept.windows(2).all(|w| w[1] == w[0] + 1);

    let mut accepted: Vec<f64> = kept.iter().map(|&g| grid[g]).collect();
    accepted.push(estimate);
    accepted.sort_by(f64::total_cmp);
    accepted.dedup();

    let point_estimate = kept
        .iter()
        .map(|&g| (grid[g], (per_null[g].cdf_value - 0.5).abs()))
        .min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then_with(|| (a.0 - estimate).abs().total_cmp(&(b.0 - estimate).abs()))
                .then_with(|| a.0.total_cmp(&b.0))
        })
        .map_or(estimate, |(v, _)| v);

    Ok(ConfidenceResult {
        target,
        alpha: opts.alpha,
        alpha_bound: None,
        observed_stat: prep.observed_stat,
        empirical_estimate: estimate,
        grid: grid.to_vec(),
        per_null,
        interval: (accepted[0], accepted[accepted.len() - 1]),
        accepted,
        point_estimate,
        contiguous,
    })
}

/// Supplies a finite interval claimed to cover the target with probability at
/// least `1 − alpha`.
pub trait BoundProvider {
    fn bound(&self, h: &Trajectory, target: Target, alpha: f64) -> (f64, f64);
}

impl<F> BoundProvider for F
where
    F: Fn(&Trajectory, Target, f64) -> (f64, f64),
{
    fn bound(&self, h: &Trajectory, target: Target, alpha: f64) -> (f64, f64) {
        self(h, target, alpha)
    }
}

/// A parameter space known in advance, e.g. `[0, 1]` for Bernoulli means. Covers
/// with probability one, so it needs no error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownSupport {
    pub lo: f64,
    pub hi: f64,
}

impl BoundProvider for KnownSupport {
    fn bound(&self, _: &Trajectory, _: Target, _: f64) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Confidence interval for a target without known bounds: `alpha_bound` is spent
/// on `provider`'s interval, and `alpha_test` on the grid tests over it.
#[allow(clippy::too_many_arguments)]
pub fn ci_unbounded(
    h: &Trajectory,
    design: &DesignSpec,
    target: Target,
    alpha_bound: f64,
    alpha_test: f64,
    provider: &dyn BoundProvider,
    grid_size: usize,
    opts: &CiOptions,
    seed: SeedSpec,
) -> Result<ConfidenceResult> {
    if !(0.0..1.0).contains(&alpha_bound) || alpha_bound + alpha_test >= 1.0 {
        return Err(Error::Config(format!(
            "need 0 <= α₁ and α₁ + α₂ < 1, got α₁ = {alpha_bound}, α₂ = {alpha_test}"
        )));
    }
    if grid_size == 0 {
        return Err(Error::Config("grid_size must be at least 1".into()));
    }
    let (lo, hi) = provider.bound(h, target, alpha_bound);
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Config(format!(
            "bounding interval [{lo}, {hi}] is empty or unbounded"
        )));
    }
    let grid = linspace(lo, hi, grid_size);
    let opts = CiOptions {
        alpha: alpha_test,
        ..*opts
    };
    let mut res = confidence_interval(h, design, target, &grid, &opts, seed)?;
    res.alpha_bound = Some(alpha_bound);
    Ok(res)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Standard normal quantile.
///
/// Acklam's rational approximation (relative error below 1.2e-9) followed by one
/// Halley step against `erfc`, which brings it to near machine precision.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let x = if p < P_LOW {
        let q = math::sqrt(-2.0 * math::ln(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = math::sqrt(-2.0 * math::ln(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * math::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// Wald interval `estimate ± z_{1−α/2}·se` that ignores the adaptive design.
pub fn wald_baseline(h: &Trajectory, target: Target, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("α must be in (0,1], got {alpha}")));
    }
    target.validate(h.arms())?;
    let stats = compute_arm_stats(h);
    let need = |a: usize| -> Result<(f64, f64)> {
        let n = stats.pulls_of(a);
        if n < 2 {
            return Err(Error::InsufficientData {
                arm: a,
                pulls: n,
                needed: 2,
            });
        }
        Ok((
            stats.mean_of(a).expect("pulled"),
            stats.varhat_of(a).expect("pulled") / n as f64,
        ))
    };
    let (center, var) = match target {
        Target::ArmMean(a) => need(a)?,
        Target::DiffMeans { arm, other } => {
            let (m1, v1) = need(arm)?;
            let (m2, v2) = need(other)?;
            (m1 - m2, v1 + v2)
        }
    };
    let half = normal_quantile(1.0 - alpha / 2.0) * math::sqrt(var);
    Ok((center - half, center + half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::DesignKind;
    use alloc::vec;

    fn two_arm(n1: usize, n2: usize) -> Trajectory {
        let mut pairs = Vec::new();
        for i in 0..n1 {
            pairs.push((1, (i % 2) as f64));
        }
        for i in 0..n2 {
            pairs.push((2, (i % 3 == 0) as u8 as f64));
        }
        Trajectory::from_pairs(2, pairs).unwrap()
    }

    #[test]
    fn bias_values() {
        // ln(ln 100)/10 = ln(4.605170)/10
        let e = BiasKind::Bias1.epsilon(100);
        assert!((e - 0.152718).abs() < 1e-6, "{e}");
        assert_eq!(BiasKind::Bias3.epsilon(7), 1.0);
        assert_eq!(BiasKind::Bias3.epsilon(1_000_000), 1.0);
        assert_eq!(BiasKind::Bias1.epsilon(2), 1.0);
        assert_eq!(BiasKind::Bias1.epsilon(3), 1.0);
        assert_eq!(BiasKind::Bias2.epsilon(3), 1.0);
        assert!((BiasKind::Bias2.epsilon(100) - 100f64.ln() / 10.0).abs() < 1e-15);
        assert_eq!(BiasKind::PlugIn.epsilon(100), 0.0);
    }

    #[test]
    fn nuisances_are_optimistic() {
        let h = two_arm(10, 30);
        let n = estimate_nuisances(&h, Target::ArmMean(1), BiasKind::Bias1).unwrap();
        assert_eq!(n.biased_mean[0], None);
        let raw = n.raw_mean[1].unwrap();
        assert!(n.biased_mean[1].unwrap() > raw);
        assert_eq!(n.epsilon(2), Some(n.biased_mean[1].unwrap() - raw));
        assert_eq!(n.varhat, compute_arm_stats(&h).varhat);
    }

    #[test]
    fn unpulled_nuisance_arm_is_named() {
        let h = Trajectory::from_pairs(3, [(1, 0.0), (3, 1.0)]).unwrap();
        assert_eq!(
            estimate_nuisances(&h, Target::ArmMean(1), BiasKind::Bias1),
            Err(Error::InsufficientData {
                arm: 2,
                pulls: 0,
                needed: 1
            })
        );
    }

    #[test]
    fn custom_bias_must_be_positive() {
        fn zero(_: u64) -> f64 {
            0.0
        }
        let h = two_arm(5, 5);
        assert!(matches!(
            estimate_nuisances(&h, Target::ArmMean(1), BiasKind::Custom(zero)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bias_rate_checks() {
        let r1 = validate_bias_rate(BiasKind::Bias1, 1_000, 10_000_000);
        assert!(r1.pass && r1.decreasing);
        // ratio is 1/√(ln ln N)
        for &(n, r) in &r1.ratios {
            let want = 1.0 / (n as f64).ln().ln().sqrt();
            assert!((r - want).abs() < 1e-12);
        }
        assert!((r1.ratios[0].1 - 0.7193).abs() < 1e-3, "{}", r1.ratios[0].1);
        assert!((r1.top_ratio - 0.5997).abs() < 1e-3, "{}", r1.top_ratio);
        assert!(validate_bias_rate(BiasKind::Bias3, 1_000, 10_000_000).pass);
        assert!(validate_bias_rate(BiasKind::Bias2, 1_000, 10_000_000).pass);
        fn fast(n: u64) -> f64 {
            1.0 / n as f64
        }
        assert!(!validate_bias_rate(BiasKind::Custom(fast), 1_000, 10_000_000).pass);
        assert!(!validate_bias_rate(BiasKind::PlugIn, 1_000, 10_000_000).pass);
        fn lil(n: u64) -> f64 {
            let x = n as f64;
            (x.ln().ln() / x).sqrt()
        }
        // exactly the LIL scale: ratio stays at 1
        assert!(!validate_bias_rate(BiasKind::Custom(lil), 1_000, 10_000_000).pass);
    }

    #[test]
    fn acceptance_band_is_closed() {
        assert!(!rejects(0.05, 0.1));
        assert!(!rejects(0.95, 0.1));
        assert!(rejects(0.0, 0.1));
        assert!(rejects(0.955, 0.1));
        assert!(rejects(0.045, 0.1));
    }

    #[test]
    fn ecdf_uses_le() {
        let v = [0.1, 0.2, 0.2, 0.3];
        assert_eq!(ecdf_at(&v, 0.2), 0.75);
        assert_eq!(ecdf_at(&v, 0.0), 0.0);
        assert_eq!(ecdf_at(&v, f64::INFINITY), 1.0);
        assert_eq!(ecdf_at(&v, f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn extreme_statistic_rejects() {
        let h = Trajectory::from_pairs(1, (0..50).map(|_| (1, -5.0)).chain([(1, -4.0)])).unwrap();
        let d = DesignSpec::new(DesignKind::FixedUniform, 1).unwrap();
        let out = test_point_null(
            &h,
            &d,
            &NullSpec::new(Target::ArmMean(1), 3.0),
            0.1,
            50,
            BiasKind::Bias1,
            SeedSpec::new(1, 0),
        )
        .unwrap();
        assert_eq!(out.cdf_value, 0.0);
        assert!(out.reject);
        assert_eq!(out.b_effective, 50);
    }

    #[test]
    fn test_requires_pulled_target() {
        let h = Trajectory::from_pairs(2, [(2, 0.0), (2, 1.0)]).unwrap();
        let d = DesignSpec::new(DesignKind::FixedUniform, 2).unwrap();
        let r = test_point_null(
            &h,
            &d,
            &NullSpec::new(Target::ArmMean(1), 0.5),
            0.1,
            10,
            BiasKind::Bias1,
            SeedSpec::new(0, 0),
        );
        assert!(matches!(r, Err(Error::InsufficientData { arm: 1, .. })));
        let r = test_point_null(
            &two_arm(4, 4),
            &d,
            &NullSpec::new(Target::ArmMean(1), 0.5),
            1.0,
            10,
            BiasKind::Bias1,
            SeedSpec::new(0, 0),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn excessive_exclusions_abort() {
        // ETC over 2 arms with T=4, explore 2 uniform steps: arm 1 often never pulled
        let d = DesignSpec::new(DesignKind::from_name("etc").unwrap(), 2).unwrap();
        let h = Trajectory::from_pairs(2, [(1, 0.0), (2, 1.0), (2, 1.0), (2, 1.0)]).unwrap();
        let r = test_point_null(
            &h,
            &d,
            &NullSpec::new(Target::ArmMean(1), 0.0),
            0.1,
            200,
            BiasKind::Bias1,
            SeedSpec::new(0, 0),
        );
        assert!(matches!(r, Err(Error::ExcessiveExclusions { .. })), "{r:?}");
    }

    #[test]
    fn zero_noise_interval_collapses() {
        let h = Trajectory::from_pairs(2, (0..40).map(|i| (1 + i % 2, 0.5))).unwrap();
        let d = DesignSpec::new(DesignKind::FixedUniform, 2).unwrap();
        let grid = linspace(0.0, 1.0, 101);
        let res = confidence_interval(
            &h,
            &d,
            Target::ArmMean(1),
            &grid,
            &CiOptions::default(),
            SeedSpec::new(3, 0),
        )
        .unwrap();
        assert_eq!(res.accepted, vec![0.5]);
        assert_eq!(res.interval, (0.5, 0.5));
        assert_eq!(res.point_estimate, 0.5);
        assert_eq!(res.per_null.len(), 101);
    }

    #[test]
    fn ci_contains_estimate_and_point_estimate() {
        let h = two_arm(40, 60);
        let d = DesignSpec::new(DesignKind::FixedUniform, 2).unwrap();
        let grid = linspace(0.0, 1.0, 41);
        let opts = CiOptions {
            replicates: 100,
            ..CiOptions::default()
        };
        let res = confidence_interval(
            &h,
            &d,
            Target::ArmMean(1),
            &grid,
            &opts,
            SeedSpec::new(4, 0),
        )
        .unwrap();
        assert!(res.accepted.contains(&res.empirical_estimate));
        assert!(res.accepted.contains(&res.point_estimate));
        assert!(res.contains(0.5));
        assert!(res.width() < 0.5);
        assert!(res.accepted.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ci_matches_individual_tests_under_common_streams() {
        let h = two_arm(30, 30);
        let d = DesignSpec::new(DesignKind::Ucb, 2).unwrap();
        let grid = [0.3, 0.5, 0.7];
        let opts = CiOptions {
            replicates: 60,
            ..CiOptions::default()
        };
        let seed = SeedSpec::new(5, 0);
        let res = confidence_interval(&h, &d, Target::ArmMean(1), &grid, &opts, seed).unwrap();
        for (g, out) in grid.iter().zip(&res.per_null) {
            let single = test_point_null(
                &h,
                &d,
                &NullSpec::new(Target::ArmMean(1), *g),
                0.1,
                60,
                BiasKind::Bias1,
                seed,
            )
            .unwrap();
            assert_eq!(&single, out);
        }
    }

    #[test]
    fn ci_rejects_bad_grids() {
        let h = two_arm(5, 5);
        let d = DesignSpec::new(DesignKind::FixedUniform, 2).unwrap();
        let o = CiOptions::default();
        let s = SeedSpec::new(0, 0);
        assert!(confidence_interval(&h, &d, Target::ArmMean(1), &[], &o, s).is_err());
        assert!(confidence_interval(&h, &d, Target::ArmMean(1), &[0.5, 0.1], &o, s).is_err());
        assert!(confidence_interval(&h, &d, Target::ArmMean(1), &[f64::NAN], &o, s).is_err());
    }

    #[test]
    fn diff_target_includes_difference_of_means() {
        let h = two_arm(40, 60);
        let d = DesignSpec::new(DesignKind::FixedUniform, 2).unwrap();
        let t = Target::DiffMeans { arm: 1, other: 2 };
        let grid = linspace(-1.0, 1.0, 41);
        let opts = CiOptions {
            replicates: 100,
            ..CiOptions::default()
        };
        let res = confidence_interval(&h, &d, t, &grid, &opts, SeedSpec::new(6, 0)).unwrap();
        let s = compute_arm_stats(&h);
        let diff = s.mean_of(1).unwrap() - s.mean_of(2).unwrap();
        assert_eq!(res.empirical_estimate, diff);
        assert!(res.accepted.contains(&diff));
        assert_eq!(res.observed_stat, s.mean_of(1).unwrap());
    }

    #[test]
    fn unbounded_with_vacuous_bound_matches_plain_ci() {
        let h = two_arm(20, 20);
        let d = DesignSpec::new(DesignKind::FixedUniform, 2).unwrap();
        let opts = CiOptions {
            replicates: 50,
            ..CiOptions::default()
        };
        let seed = SeedSpec::new(7, 0);
        let plain = confidence_interval(
            &h,
            &d,
            Target::ArmMean(1),
            &linspace(0.0, 1.0, 21),
            &opts,
            seed,
        )
        .unwrap();
        let support = KnownSupport { lo: 0.0, hi: 1.0 };
        let ub = ci_unbounded(
            &h,
            &d,
            Target::ArmMean(1),
            0.0,
            0.1,
            &support,
            21,
            &opts,
            seed,
        )
        .unwrap();
        assert_eq!(ub.alpha_bound, Some(0.0));
        assert_eq!(ub.per_null, plain.per_null);
        assert_eq!(ub.interval, plain.interval);

        let wide = |_: &Trajectory, _: Target, _: f64| (-2.0, 2.0);
        let r = ci_unbounded(
            &h,
            &d,
            Target::ArmMean(1),
            0.01,
            0.09,
            &wide,
            81,
            &opts,
            seed,
        )
        .unwrap();
        assert!(r.interval.0 >= -2.0 && r.interval.1 <= 2.0);
        assert_eq!(r.alpha, 0.09);

        let empty = |_: &Trajectory, _: Target, _: f64| (1.0, -1.0);
        assert!(ci_unbounded(
            &h,
            &d,
            Target::ArmMean(1),
            0.01,
            0.09,
            &empty,
            10,
            &opts,
            seed
        )
        .is_err());
        let inf = |_: &Trajectory, _: Target, _: f64| (0.0, f64::INFINITY);
        assert!(ci_unbounded(
            &h,
            &d,
            Target::ArmMean(1),
            0.01,
            0.09,
            &inf,
            10,
            &opts,
            seed
        )
        .is_err());
    }

    #[test]
    fn normal_quantile_values() {
        assert!((normal_quantile(0.95) - 1.6448536269514722).abs() < 1e-13);
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-13);
        assert!((normal_quantile(0.001) + 3.090232306167813).abs() < 1e-12);
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!(normal_quantile(1.5).is_nan());
    }

    #[test]
    fn wald_values() {
        // 100 pulls, mean 0.5, varhat 0.25
        let h = Trajectory::from_pairs(1, (0..100).map(|i| (1, (i % 2) as f64))).unwrap();
        let (lo, hi) = wald_baseline(&h, Target::ArmMean(1), 0.1).unwrap();
        assert!((lo - 0.41776).abs() < 1e-5 && (hi - 0.58224).abs() < 1e-5);
        let (lo, hi) = wald_baseline(&h, Target::ArmMean(1), 1.0).unwrap();
        assert_eq!(lo, hi);
        let flat = Trajectory::from_pairs(1, (0..10).map(|_| (1, 0.3))).unwrap();
        assert_eq!(
            wald_baseline(&flat, Target::ArmMean(1), 0.1).unwrap(),
            (0.3, 0.3)
        );
        let short = Trajectory::from_pairs(1, [(1, 0.3)]).unwrap();
        assert!(matches!(
            wald_baseline(&short, Target::ArmMean(1), 0.1),
            Err(Error::InsufficientData { needed: 2, .. })
        ));
        let h2 = two_arm(10, 10);
        let (lo, hi) = wald_baseline(&h2, Target::DiffMeans { arm: 1, other: 2 }, 0.1).unwrap();
        let s = compute_arm_stats(&h2);
        let c = s.mean_of(1).unwrap() - s.mean_of(2).unwrap();
        assert!(((lo + hi) / 2.0 - c).abs() < 1e-12);
    }
}
