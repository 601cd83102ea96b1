//! Simulation studies over an [`ExperimentPlan`].
//!
//! Replication `r` of setup `s` draws its true experiment and all its
//! resimulations from `derive_seed(derive_seed(plan.seed, s), r)`, so results
//! do not depend on scheduling or worker count. The seed is shared across
//! horizons and bias kinds, which couples those comparisons.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use optimist_core::{
    confidence_interval, derive_seed, linspace, rejects, run_true_experiment, test_point_null,
    wald_baseline, BiasKind, CiOptions, DesignSpec, NullSpec, SeedSpec, Target, Trajectory,
};

use crate::error::{Error, Result};
use crate::plan::{CheckResult, ExperimentPlan, PlanKind, Setup};

/// Stream of the true experiment; resimulations use streams from 0 upwards.
const TRUE_STREAM: u64 = u64::MAX;

/// One metric value; the long format keeps one metric per row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub plan: String,
    pub setup: String,
    pub t: usize,
    pub method: String,
    pub alpha: f64,
    pub metric: String,
    pub value: f64,
    pub se: Option<f64>,
}

impl MetricRow {
    /// Wall-clock metrics, the only values that vary between identical runs.
    pub fn is_runtime(&self) -> bool {
        self.metric.starts_with("runtime_")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRow {
    pub plan: String,
    pub setup: String,
    pub t: usize,
    pub method: String,
    pub alpha: f64,
    pub quantity: String,
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub metrics: Vec<MetricRow>,
    pub quantiles: Vec<QuantileRow>,
}

impl Report {
    pub fn find(&self, setup: &str, t: usize, method: &str, metric: &str) -> Option<&MetricRow> {
        self.metrics
            .iter()
            .find(|r| r.setup == setup && r.t == t && r.method == method && r.metric == metric)
    }

    pub fn check(&self, plan: &ExperimentPlan) -> Vec<CheckResult> {
        plan.checks
            .iter()
            .map(|c| c.evaluate(&self.metrics))
            .collect()
    }
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Mean and standard error of the mean.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Binomial proportion and its standard error `√(p(1−p)/n)`.
fn proportion(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Type-7 sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, frac) = (h.floor() as usize, h - h.floor());
    match sorted.get(lo + 1) {
        Some(&next) => sorted[lo] + frac * (next - sorted[lo]),
        None => sorted[lo],
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn rep_seed(plan: &ExperimentPlan, setup_idx: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(plan.seed, setup_idx as u64), rep as u64)
}

struct Ctx<'a> {
    plan: &'a ExperimentPlan,
    setup: &'a Setup,
    setup_idx: usize,
    design: DesignSpec,
    target: Target,
    theta_star: f64,
    model: optimist_core::ArmModel,
}

impl<'a> Ctx<'a> {
    fn new(plan: &'a ExperimentPlan, setup_idx: usize) -> Result<Self> {
        let setup = &plan.setups[setup_idx];
        let model = setup.model()?;
        let target = plan.target()?;
        Ok(Self {
            plan,
            setup,
            setup_idx,
            design: plan.design_spec(model.arms())?,
            target,
            theta_star: target.value(model.means()),
            model,
        })
    }

    fn true_run(&self, t: usize, rep: usize) -> Result<(Trajectory, u64)> {
        let seed = rep_seed(self.plan, self.setup_idx, rep);
        let h = run_true_experiment(
            &self.design,
            &self.model,
            t,
            SeedSpec::new(seed, TRUE_STREAM),
        )?;
        Ok((h, seed))
    }

    fn row(
        &self,
        t: usize,
        method: &str,
        alpha: f64,
        metric: &str,
        value: f64,
        se: Option<f64>,
    ) -> MetricRow {
        MetricRow {
            plan: self.plan.name.clone(),
            setup: self.setup.name.clone(),
            t,
            method: method.to_string(),
            alpha,
            metric: metric.to_string(),
            value,
            se,
        }
    }

    fn quantiles(
        &self,
        t: usize,
        method: &str,
        alpha: f64,
        quantity: &str,
        xs: &[f64],
    ) -> Vec<QuantileRow> {
        let s = sorted(xs);
        QUANTILE_LEVELS
            .iter()
            .map(|&q| QuantileRow {
                plan: self.plan.name.clone(),
                setup: self.setup.name.clone(),
                t,
                method: method.to_string(),
                alpha,
                quantity: quantity.to_string(),
                q,
                value: quantile_sorted(&s, q),
            })
            .collect()
    }
}

/// CDF values `F̂` for every replication, bias kind and null offset at horizon `t`,
/// indexed `[rep][bias][offset]`.
fn null_cdfs(ctx: &Ctx, t: usize, biases: &[BiasKind]) -> Result<Vec<Vec<Vec<f64>>>> {
    let plan = ctx.plan;
    let alpha = plan.alphas[0];
    (0..plan.reps)
        .into_par_iter()
        .map(|rep| {
            let (h, seed) = ctx.true_run(t, rep)?;
            biases
                .iter()
                .map(|&bias| {
                    plan.offsets
                        .iter()
                        .map(|&off| {
                            let null = NullSpec::new(ctx.target, ctx.theta_star + off);
                            let out = test_point_null(
                                &h,
                                &ctx.design,
                                &null,
                                alpha,
                                plan.replicates,
                                bias,
                                SeedSpec::new(seed, 0),
                            )?;
                            Ok(out.cdf_value)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn rejection_rows(
    ctx: &Ctx,
    t: usize,
    biases: &[BiasKind],
    cdfs: &[Vec<Vec<f64>>],
    report: &mut Report,
) {
    let plan = ctx.plan;
    for (bi, bias) in biases.iter().enumerate() {
        let method = bias.label();
        for (oi, &off) in plan.offsets.iter().enumerate() {
            let values: Vec<f64> = cdfs.iter().map(|c| c[bi][oi]).collect();
            for &alpha in &plan.alphas {
                let hits = values.iter().filter(|&&f| rejects(f, alpha)).count();
                let (p, se) = proportion(hits, plan.reps);
                if off == 0.0 {
                    report
                        .metrics
                        .push(ctx.row(t, method, alpha, "type1", p, Some(se)));
                    let nominal_se = (alpha * (1.0 - alpha) / plan.reps as f64).sqrt();
                    report.metrics.push(ctx.row(
                        t,
                        method,
                        alpha,
                        "excess_type1",
                        p - alpha,
                        Some(nominal_se),
                    ));
                } else {
                    report.metrics.push(ctx.row(
                        t,
                        method,
                        alpha,
                        &format!("power@{off:+}"),
                        p,
                        Some(se),
                    ));
                }
            }
            let quantity = if off == 0.0 {
                "cdf_value".to_string()
            } else {
                format!("cdf_value@{off:+}")
            };
            report
                .quantiles
                .extend(ctx.quantiles(t, method, plan.alphas[0], &quantity, &values));
        }
    }
}

/// Realized minus nominal type I error of the true null, per bias kind and α.
///
/// Emits `type1` (with its binomial SE) and `excess_type1` (with the SE of a
/// level-α test, `√(α(1−α)/R)`). Nonzero `offsets` add `power@<offset>` rows.
pub fn run_calibration(plan: &ExperimentPlan) -> Result<Report> {
    plan.validate()?;
    let biases = plan.bias_kinds()?;
    let mut report = Report::default();
    for s in 0..plan.setups.len() {
        let ctx = Ctx::new(plan, s)?;
        for &t in &plan.horizons {
            let cdfs = null_cdfs(&ctx, t, &biases)?;
            rejection_rows(&ctx, t, &biases, &cdfs, &mut report);
        }
    }
    Ok(report)
}

/// Bias kinds compared on type I error at the true null and power at shifted
/// nulls. Same computation as [`run_calibration`]; every bias sees the same
/// trajectories and random streams.
pub fn run_bias_ablation(plan: &ExperimentPlan) -> Result<Report> {
    run_calibration(plan)
}

/// Per-replication results of one confidence interval method.
#[derive(Default)]
struct Tally {
    covered: Vec<bool>,
    width: Vec<f64>,
    sq_err: Vec<f64>,
    abs_err: Vec<f64>,
    contiguous: Vec<bool>,
    seconds: Vec<f64>,
}

impl Tally {
    fn push(&mut self, interval: (f64, f64), estimate: f64, truth: f64) {
        self.covered
            .push(interval.0 <= truth && truth <= interval.1);
        self.width.push(interval.1 - interval.0);
        self.sq_err.push((estimate - truth).powi(2));
        self.abs_err.push((estimate - truth).abs());
    }

    fn emit(&self, ctx: &Ctx, t: usize, method: &str, alpha: f64, report: &mut Report) {
        let r = self.covered.len();
        let (cov, cov_se) = proportion(self.covered.iter().filter(|&&c| c).count(), r);
        let (w, w_se) = mean_se(&self.width);
        let (mse, mse_se) = mean_se(&self.sq_err);
        let m = &mut report.metrics;
        m.push(ctx.row(t, method, alpha, "coverage", cov, Some(cov_se)));
        m.push(ctx.row(t, method, alpha, "mean_width", w, Some(w_se)));
        m.push(ctx.row(
            t,
            method,
            alpha,
            "median_width",
            quantile_sorted(&sorted(&self.width), 0.5),
            None,
        ));
        m.push(ctx.row(t, method, alpha, "mse", mse, Some(mse_se)));
        m.push(ctx.row(
            t,
            method,
            alpha,
            "median_abs_error",
            quantile_sorted(&sorted(&self.abs_err), 0.5),
            None,
        ));
        if !self.contiguous.is_empty() {
            let (p, se) = proportion(self.contiguous.iter().filter(|&&c| !c).count(), r);
            m.push(ctx.row(t, method, alpha, "noncontiguous_rate", p, Some(se)));
        }
        if !self.seconds.is_empty() {
            let (s, se) = mean_se(&self.seconds);
            m.push(ctx.row(t, method, alpha, "runtime_ci_seconds", s, Some(se)));
        }
        report
            .quantiles
            .extend(ctx.quantiles(t, method, alpha, "width", &self.width));
        report
            .quantiles
            .extend(ctx.quantiles(t, method, alpha, "abs_error", &self.abs_err));
    }
}

struct RepCi {
    sim: Vec<((f64, f64), f64, bool, f64)>,
    wald: (f64, f64),
    estimate: f64,
}

/// Coverage, width and point-estimate error of the simulation interval (one
/// method per bias kind, labelled `sim_<bias>`) and of the Wald baseline
/// (`wald`), per setup and horizon.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<Report> {
    plan.validate()?;
    let biases = plan.bias_kinds()?;
    let seed_mode = plan.seed_mode()?;
    let grid = plan.grid.as_ref().expect("validated").values()?;
    let mut report = Report::default();
    for s in 0..plan.setups.len() {
        let ctx = Ctx::new(plan, s)?;
        for &t in &plan.horizons {
            for &alpha in &plan.alphas {
                let reps: Vec<RepCi> = (0..plan.reps)
                    .into_par_iter()
                    .map(|rep| {
                        let (h, seed) = ctx.true_run(t, rep)?;
                        let sim = biases
                            .iter()
                            .map(|&bias| {
                                let opts = CiOptions {
                                    alpha,
                                    replicates: plan.replicates,
                                    bias,
                                    seed_mode,
                                };
                                let start = Instant::now();
                                let ci = confidence_interval(
                                    &h,
                                    &ctx.design,
                                    ctx.target,
                                    &grid,
                                    &opts,
                                    SeedSpec::new(seed, 0),
                                )?;
                                let secs = start.elapsed().as_secs_f64();
                                Ok((ci.interval, ci.point_estimate, ci.contiguous, secs))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        let wald = wald_baseline(&h, ctx.target, alpha)?;
                        Ok(RepCi {
                            sim,
                            wald,
                            estimate: 0.5 * (wald.0 + wald.1),
                        })
                    })
                    .collect::<Result<_>>()?;
                for (bi, bias) in biases.iter().enumerate() {
                    let mut tally = Tally::default();
                    for r in &reps {
                        let (interval, est, contiguous, secs) = r.sim[bi];
                        tally.push(interval, est, ctx.theta_star);
                        tally.contiguous.push(contiguous);
                        tally.seconds.push(secs);
                    }
                    tally.emit(
                        &ctx,
                        t,
                        &format!("sim_{}", bias.label()),
                        alpha,
                        &mut report,
                    );
                }
                let mut wald = Tally::default();
                for r in &reps {
                    wald.push(r.wald, r.estimate, ctx.theta_star);
                }
                wald.emit(&ctx, t, "wald", alpha, &mut report);
            }
        }
    }
    Ok(report)
}

/// Fastest wall-clock per confidence interval over the `G × B` grid of the
/// plan's `[runtime]` block, on one trajectory from the first setup at the first
/// horizon, plus the ratio for each doubling of `G` or of `B`.
pub fn run_runtime_scaling(plan: &ExperimentPlan) -> Result<Report> {
    plan.validate()?;
    let rt = plan.runtime.as_ref().expect("validated");
    let ctx = Ctx::new(plan, 0)?;
    let t = plan.horizons[0];
    let alpha = plan.alphas[0];
    let bias = plan.bias_kinds()?[0];
    let seed_mode = plan.seed_mode()?;
    let (lo, hi) = match &plan.grid {
        Some(g) => {
            let v = g.values()?;
            (v[0], v[v.len() - 1])
        }
        None => (0.0, 1.0),
    };
    let (h, seed) = ctx.true_run(t, 0)?;
    let cells: Vec<(usize, usize)> = rt
        .grid_sizes
        .iter()
        .flat_map(|&g| rt.replicates.iter().map(move |&b| (g, b)))
        .collect();
    let mut best = vec![f64::INFINITY; cells.len()];
    for _ in 0..rt.repeats {
        for (i, &(g, b)) in cells.iter().enumerate() {
            let grid = linspace(lo, hi, g);
            let opts = CiOptions {
                alpha,
                replicates: b,
                bias,
                seed_mode,
            };
            let start = Instant::now();
            confidence_interval(
                &h,
                &ctx.design,
                ctx.target,
                &grid,
                &opts,
                SeedSpec::new(seed, 0),
            )?;
            best[i] = best[i].min(start.elapsed().as_secs_f64());
        }
    }
    let mut report = Report::default();
    let secs = |g: usize, b: usize| cells.iter().position(|&c| c == (g, b)).map(|i| best[i]);
    for (i, &(g, b)) in cells.iter().enumerate() {
        report.metrics.push(ctx.row(
            t,
            &format!("G{g}_B{b}"),
            alpha,
            "runtime_ci_seconds",
            best[i],
            None,
        ));
    }
    for &(g, b) in &cells {
        if let (Some(s1), Some(s2)) = (secs(g, b), secs(2 * g, b)) {
            report.metrics.push(ctx.row(
                t,
                &format!("B{b}:G{g}->G{}", 2 * g),
                alpha,
                "runtime_ratio_double_g",
                s2 / s1,
                None,
            ));
        }
        if let (Some(s1), Some(s2)) = (secs(g, b), secs(g, 2 * b)) {
            report.metrics.push(ctx.row(
                t,
                &format!("G{g}:B{b}->B{}", 2 * b),
                alpha,
                "runtime_ratio_double_b",
                s2 / s1,
                None,
            ));
        }
    }
    Ok(report)
}

pub fn run_plan(plan: &ExperimentPlan) -> Result<Report> {
    match plan.kind {
        PlanKind::Calibration => run_calibration(plan),
        PlanKind::Sweep => run_sweep(plan),
        PlanKind::BiasAblation => run_bias_ablation(plan),
        PlanKind::RuntimeScaling => run_runtime_scaling(plan),
    }
}

/// First line of each results file: the run manifest as a comment.
pub fn manifest_line(plan: &ExperimentPlan) -> String {
    format!(
        "# plan={} plan_hash={} seed={} version={}\n",
        plan.name,
        plan.hash(),
        plan.seed,
        env!("CARGO_PKG_VERSION")
    )
}

fn write_csv<S: Serialize>(path: &Path, header: &str, rows: &[S]) -> Result<()> {
    let io = |e: std::io::Error| Error::io(path, e);
    let mut f = BufWriter::new(File::create(path).map_err(io)?);
    f.write_all(header.as_bytes()).map_err(io)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(f);
    for r in rows {
        w.serialize(r).map_err(|e| io(e.into()))?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn write_metrics(path: &Path, plan: &ExperimentPlan, report: &Report) -> Result<()> {
    write_csv(path, &manifest_line(plan), &report.metrics)
}

pub fn write_quantiles(path: &Path, plan: &ExperimentPlan, report: &Report) -> Result<()> {
    write_csv(path, &manifest_line(plan), &report.quantiles)
}

/// Creates a fresh `<root>/<plan>/<UTC timestamp>` directory, adding a numeric
/// suffix if one already exists for this second.
pub fn new_run_dir(root: &Path, plan: &ExperimentPlan) -> Result<PathBuf> {
    let base = root.join(&plan.name);
    fs::create_dir_all(&base).map_err(|e| Error::io(&base, e))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    for n in 0.. {
        let dir = if n == 0 {
            base.join(&stamp)
        } else {
            base.join(format!("{stamp}-{n}"))
        };
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(Error::io(&dir, e)),
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn proportion_se() {
        let (p, se) = proportion(90, 100);
        assert_eq!(p, 0.9);
        assert!((se - 0.03).abs() < 1e-12);
    }

    #[test]
    fn mean_se_matches_hand_values() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
