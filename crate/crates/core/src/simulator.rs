//! Trajectory generation: resimulation under a point null with Gaussian outcomes,
//! and runs of a design against known arm distributions.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::designs::{DesignPlan, DesignSpec};
use crate::error::{Error, Result};
use crate::inference::NuisanceVector;
use crate::math;
use crate::rng::{rng_stream, RngStream, SeedSpec};
use crate::trajectory::Trajectory;

/// True outcome distributions of the arms.
#[derive(Debug, Clone, PartialEq)]
pub enum ArmModel {
    Bernoulli { means: Vec<f64> },
    Gaussian { means: Vec<f64>, sds: Vec<f64> },
}

impl ArmModel {
    pub fn bernoulli(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() || means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::Config(format!(
                "Bernoulli means must be non-empty and in [0,1], got {means:?}"
            )));
        }
        Ok(ArmModel::Bernoulli { means })
    }

    pub fn gaussian(means: Vec<f64>, sds: Vec<f64>) -> Result<Self> {
        if means.is_empty()
            || means.len() != sds.len()
            || means.iter().any(|m| !m.is_finite())
            || sds.iter().any(|s| !(*s >= 0.0 && s.is_finite()))
        {
            return Err(Error::Config(format!(
                "Gaussian arms need equal-length finite means and sds >= 0, got {means:?} / {sds:?}"
            )));
        }
        Ok(ArmModel::Gaussian { means, sds })
    }

    pub fn arms(&self) -> usize {
        self.means().len()
    }

    pub fn means(&self) -> &[f64] {
        match self {
            ArmModel::Bernoulli { means } | ArmModel::Gaussian { means, .. } => means,
        }
    }

    /// Draws one outcome from the 1-based `arm`.
    pub fn sample<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        match self {
            ArmModel::Bernoulli { means } => {
                if rng.random::<f64>() < means[arm - 1] {
                    1.0
                } else {
                    0.0
                }
            }
            ArmModel::Gaussian { means, sds } => {
                let z: f64 = StandardNormal.sample(rng);
                means[arm - 1] + sds[arm - 1] * z
            }
        }
    }
}

/// The inferential target `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `θ = μ_arm`.
    ArmMean(usize),
    /// `θ = μ_arm − μ_other`. The test statistic is the sample mean of `arm`,
    /// which must be fixed before looking at the data.
    DiffMeans { arm: usize, other: usize },
}

impl Target {
    /// The arm whose sample mean is the test statistic.
    pub fn stat_arm(&self) -> usize {
        match *self {
            Target::ArmMean(a) => a,
            Target::DiffMeans { arm, .. } => arm,
        }
    }

    pub fn validate(&self, arms: usize) -> Result<()> {
        let check = |a: usize| {
            if a == 0 || a > arms {
                Err(Error::ArmOutOfRange { arm: a, arms })
            } else {
                Ok(())
            }
        };
        match *self {
            Target::ArmMean(a) => check(a),
            Target::DiffMeans { arm, other } => {
                check(arm)?;
                check(other)?;
                if arm == other {
                    return Err(Error::Config(format!(
                        "difference target needs two distinct arms, got {arm} twice"
                    )));
                }
                Ok(())
            }
        }
    }

    /// True value of the target under known arm means.
    pub fn value(&self, means: &[f64]) -> f64 {
        match *self {
            Target::ArmMean(a) => means[a - 1],
            Target::DiffMeans { arm, other } => means[arm - 1] - means[other - 1],
        }
    }
}

/// A point null `θ = θ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullSpec {
    pub target: Target,
    pub theta0: f64,
}

impl NullSpec {
    pub fn new(target: Target, theta0: f64) -> Self {
        Self { target, theta0 }
    }
}

/// Per-arm Gaussian parameters used when resimulating under `null`.
fn null_arm_params(
    design: &DesignSpec,
    null: &NullSpec,
    nuis: &NuisanceVector,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let arms = design.arms();
    null.target.validate(arms)?;
    if nuis.arms() != arms {
        return Err(Error::Config(format!(
            "nuisance vector covers {} arms, design has {arms}",
            nuis.arms()
        )));
    }
    if nuis.target.stat_arm() != null.target.stat_arm() {
        return Err(Error::Config(
            "nuisance vector was estimated for a different target arm".into(),
        ));
    }
    if !null.theta0.is_finite() {
        return Err(Error::Config(format!(
            "θ₀ must be finite, got {}",
            null.theta0
        )));
    }
    let missing =
        |what: &str, a: usize| Error::Config(format!("missing nuisance {what} for arm {a}"));
    let stat = null.target.stat_arm();
    let mut means = Vec::with_capacity(arms);
    let mut sds = Vec::with_capacity(arms);
    for a in 1..=arms {
        let var = nuis.varhat[a - 1].ok_or_else(|| missing("variance", a))?;
        sds.push(math::sqrt(var));
        let m = if a == stat {
            match null.target {
                Target::ArmMean(_) => null.theta0,
                Target::DiffMeans { other, .. } => {
                    null.theta0
                        + nuis.biased_mean[other - 1].ok_or_else(|| missing("mean", other))?
                }
            }
        } else {
            nuis.biased_mean[a - 1].ok_or_else(|| missing("mean", a))?
        };
        means.push(m);
    }
    Ok((means, sds))
}

/// Runs `design` for `horizon` steps with `Normal(means[a], sds[a]²)` outcomes,
/// reporting each `(arm, outcome)` to `sink`.
#[inline]
fn run_gaussian<F: FnMut(usize, f64)>(
    design: &DesignPlan,
    means: &[f64],
    sds: &[f64],
    horizon: usize,
    rng: &mut RngStream,
    mut sink: F,
) {
    let mut state = design.start();
    for _ in 0..horizon {
        let arm = state
            .select_arm(rng)
            .expect("loop stays within the design horizon");
        let z: f64 = StandardNormal.sample(rng);
        let x = means[arm - 1] + sds[arm - 1] * z;
        state.update(arm, x);
        sink(arm, x);
    }
}

/// Generates one trajectory under the null with Gaussian outcomes.
///
/// The target arm is simulated at `θ₀` (or at `θ₀` plus the other arm's biased
/// mean for a difference target); every other arm at its biased nuisance mean.
/// All arms use their plug-in variance.
pub fn simulate_null_trajectory(
    design: &DesignSpec,
    null: &NullSpec,
    nuis: &NuisanceVector,
    horizon: usize,
    seed: SeedSpec,
) -> Result<Trajectory> {
    let (means, sds) = null_arm_params(design, null, nuis)?;
    let mut rng = rng_stream(seed);
    let mut h = Trajectory::with_capacity(design.arms(), horizon);
    run_gaussian(
        &design.plan(horizon),
        &means,
        &sds,
        horizon,
        &mut rng,
        |a, x| h.push_unchecked(a, x),
    );
    Ok(h)
}

/// Runs `design` against the true arm distributions.
pub fn run_true_experiment(
    design: &DesignSpec,
    model: &ArmModel,
    horizon: usize,
    seed: SeedSpec,
) -> Result<Trajectory> {
    if model.arms() != design.arms() {
        return Err(Error::Config(format!(
            "arm model has {} arms, design has {}",
            model.arms(),
            design.arms()
        )));
    }
    let mut rng = rng_stream(seed);
    let mut state = design.start(horizon);
    let mut h = Trajectory::with_capacity(design.arms(), horizon);
    for _ in 0..horizon {
        let arm = state.select_arm(&mut rng)?;
        let x = model.sample(arm, &mut rng);
        state.update(arm, x);
        h.push_unchecked(arm, x);
    }
    Ok(h)
}

/// Statistics from a batch of null resimulations.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    /// One entry per replicate, in replicate order; `None` when the statistic arm was
    /// never pulled.
    pub statistics: Vec<Option<f64>>,
}

impl BatchOutput {
    pub fn requested(&self) -> usize {
        self.statistics.len()
    }

    pub fn excluded(&self) -> usize {
        self.statistics.iter().filter(|s| s.is_none()).count()
    }

    /// The defined statistics, in replicate order.
    pub fn values(&self) -> Vec<f64> {
        self.statistics.iter().flatten().copied().collect()
    }
}

/// Resimulates the experiment `replicates` times under `null`.
///
/// Replicate `i` draws from stream `seed.stream_id + i`, so increasing the count
/// only appends to the output, and the result does not depend on how replicates
/// are scheduled across workers.
pub fn batch_simulate(
    design: &DesignSpec,
    null: &NullSpec,
    nuis: &NuisanceVector,
    horizon: usize,
    replicates: usize,
    seed: SeedSpec,
) -> Result<BatchOutput> {
    if replicates == 0 {
        return Err(Error::Config(
            "simulation count B must be at least 1".into(),
        ));
    }
    let (means, sds) = null_arm_params(design, null, nuis)?;
    let stat = null.target.stat_arm();
    let plan = design.plan(horizon);
    let one = |i: usize| -> Option<f64> {
        let mut rng = rng_stream(seed.with_stream(seed.stream_id.wrapping_add(i as u64)));
        let (mut n, mut sum) = (0u64, 0.0f64);
        run_gaussian(&plan, &means, &sds, horizon, &mut rng, |a, x| {
            if a == stat {
                n += 1;
                sum += x;
            }
        });
        (n > 0).then(|| sum / n as f64)
    };
    #[cfg(feature = "std")]
    let statistics = {
        use rayon::prelude::*;
        (0..replicates).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "std"))]
    let statistics = (0..replicates).map(one).collect();
    Ok(BatchOutput { statistics })
}
