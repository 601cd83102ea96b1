//! Bandit sampling schemes `π_t : H_{t-1} → Δ^K`.
//!
//! A [`DesignSpec`] is a policy template (kind, parameters, arm count). A
//! [`DesignState`] instantiates it for a fixed horizon `T` and is driven by
//! alternating [`DesignState::select_arm`] and [`DesignState::update`] calls.
//!
//! Conventions shared by every design:
//!
//! * argmax ties go to the lowest arm index;
//! * "greedy" and UCB rules pull never-pulled arms first, lowest index first;
//! * steps whose choice is deterministic draw nothing from the random source.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::math;

/// How the exploration phase of explore-then-commit picks arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exploration {
    /// Uniformly at random each step.
    Uniform,
    /// Cycle `1, 2, ..., K, 1, ...`, giving each arm an equal share.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignKind {
    /// Explore for `⌊explore_fraction·T⌋` steps, then pull the empirical best arm.
    Etc {
        explore_fraction: f64,
        exploration: Exploration,
    },
    /// Argmax of `μ̂(a) + √(2 ln T / N(a))`.
    Ucb,
    /// Greedy on sample means; explores uniformly with probability
    /// `min(1, epsilon + c/t)`.
    EpsGreedy { epsilon: f64, c: f64 },
    /// Uniform pull with probability `t^{-β}`, otherwise defer to `base`.
    ClippedDecay { beta: f64, base: Box<DesignKind> },
    /// Uniform pull with fixed probability `γ`, otherwise defer to `base`.
    GammaMixture { gamma: f64, base: Box<DesignKind> },
    /// Beta-Bernoulli Thompson sampling with posteriors refreshed every
    /// `batch_size` rounds.
    BatchedThompson { batch_size: usize },
    /// Uniform over all arms at every step.
    FixedUniform,
}

impl DesignKind {
    pub fn name(&self) -> &'static str {
        match self {
            DesignKind::Etc { .. } => "etc",
            DesignKind::Ucb => "ucb",
            DesignKind::EpsGreedy { .. } => "eps_greedy",
            DesignKind::ClippedDecay { .. } => "clipped_decay",
            DesignKind::GammaMixture { .. } => "gamma_mixture",
            DesignKind::BatchedThompson { .. } => "batched_thompson",
            DesignKind::FixedUniform => "fixed_uniform",
        }
    }

    /// Kind with its default parameters, by raw kind name or catalog template name.
    pub fn from_name(name: &str) -> Option<DesignKind> {
        let raw = match name {
            "etc" => DesignKind::Etc {
                explore_fraction: 0.5,
                exploration: Exploration::Uniform,
            },
            "ucb" => DesignKind::Ucb,
            "eps_greedy" | "greedy" => DesignKind::EpsGreedy {
                epsilon: 0.0,
                c: 0.0,
            },
            "clipped_decay" => DesignKind::ClippedDecay {
                beta: 0.7,
                base: Box::new(DesignKind::Ucb),
            },
            "gamma_mixture" => DesignKind::GammaMixture {
                gamma: 0.1,
                base: Box::new(DesignKind::EpsGreedy {
                    epsilon: 0.0,
                    c: 1.0,
                }),
            },
            "batched_thompson" | "thompson" => DesignKind::BatchedThompson { batch_size: 100 },
            "fixed_uniform" | "uniform" => DesignKind::FixedUniform,
            other => {
                return design_catalog()
                    .into_iter()
                    .find(|e| e.name == other)
                    .map(|e| e.kind)
            }
        };
        Some(raw)
    }

    /// Builds a kind from a name plus `key = value` overrides.
    ///
    /// Recognized keys: `explore_fraction`, `exploration` (`uniform` |
    /// `round_robin`) for `etc`; `epsilon`, `c` for `eps_greedy`; `beta` and
    /// `gamma` for the wrappers, whose base is chosen with `base = <name>` and
    /// configured through `base.<key>`; `batch_size` for `batched_thompson`.
    pub fn from_key_values(name: &str, params: &[(&str, &str)]) -> Result<DesignKind> {
        let mut kind = DesignKind::from_name(name)
            .ok_or_else(|| Error::InvalidDesign(format!("unknown design kind `{name}`")))?;
        // `base` must be applied before any `base.*` key
        if let Some((_, v)) = params.iter().find(|(k, _)| *k == "base") {
            kind.set_param("base", v)?;
        }
        for (k, v) in params.iter().filter(|(k, _)| *k != "base") {
            kind.set_param(k, v)?;
        }
        Ok(kind)
    }

    fn set_param(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidDesign(format!("{what} `{key} = {value}`"));
        let num = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| bad("not a number:"))
        };
        if let Some(rest) = key.strip_prefix("base.") {
            return match self {
                DesignKind::ClippedDecay { base, .. } | DesignKind::GammaMixture { base, .. } => {
                    base.set_param(rest, value)
                }
                _ => Err(bad("design has no base:")),
            };
        }
        match (self, key) {
            (
                DesignKind::Etc {
                    explore_fraction, ..
                },
                "explore_fraction",
            ) => *explore_fraction = num()?,
            (DesignKind::Etc { exploration, .. }, "exploration") => {
                *exploration = match value.trim() {
                    "uniform" => Exploration::Uniform,
                    "round_robin" => Exploration::RoundRobin,
                    _ => return Err(bad("unknown exploration mode:")),
                }
            }
            (DesignKind::EpsGreedy { epsilon, .. }, "epsilon") => *epsilon = num()?,
            (DesignKind::EpsGreedy { c, .. }, "c") => *c = num()?,
            (DesignKind::ClippedDecay { beta, .. }, "beta") => *beta = num()?,
            (DesignKind::GammaMixture { gamma, .. }, "gamma") => *gamma = num()?,
            (
                DesignKind::ClippedDecay { base, .. } | DesignKind::GammaMixture { base, .. },
                "base",
            ) => {
                **base = DesignKind::from_name(value.trim())
                    .ok_or_else(|| bad("unknown base design:"))?
            }
            (DesignKind::BatchedThompson { batch_size }, "batch_size") => {
                *batch_size = value.trim().parse().map_err(|_| bad("not an integer:"))?
            }
            _ => return Err(bad("unknown parameter for this design:")),
        }
        Ok(())
    }

    /// Every parameter as `(key, value)`, with wrapped designs under `base.`.
    pub fn params(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.collect_params("", &mut out);
        out
    }

    fn collect_params(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        let mut put = |k: &str, v: String| out.push((format!("{prefix}{k}"), v));
        match self {
            DesignKind::Etc {
                explore_fraction,
                exploration,
            } => {
                put("explore_fraction", explore_fraction.to_string());
                put(
                    "exploration",
                    match exploration {
                        Exploration::Uniform => "uniform",
                        Exploration::RoundRobin => "round_robin",
                    }
                    .into(),
                );
            }
            DesignKind::EpsGreedy { epsilon, c } => {
                put("epsilon", epsilon.to_string());
                put("c", c.to_string());
            }
            DesignKind::ClippedDecay { beta, base } => {
                put("beta", beta.to_string());
                put("base", base.name().into());
                base.collect_params(&format!("{prefix}base."), out);
            }
            DesignKind::GammaMixture { gamma, base } => {
                put("gamma", gamma.to_string());
                put("base", base.name().into());
                base.collect_params(&format!("{prefix}base."), out);
            }
            DesignKind::BatchedThompson { batch_size } => put("batch_size", batch_size.to_string()),
            DesignKind::Ucb | DesignKind::FixedUniform => {}
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidDesign(msg));
        match self {
            DesignKind::Etc {
                explore_fraction, ..
            } if !(*explore_fraction > 0.0 && *explore_fraction < 1.0) => fail(format!(
                "explore_fraction must be in (0,1), got {explore_fraction}"
            )),
            DesignKind::EpsGreedy { epsilon, c }
                if !(0.0..=1.0).contains(epsilon) || !(*c >= 0.0 && c.is_finite()) =>
            {
                fail(format!(
                    "eps_greedy needs epsilon in [0,1] and c >= 0, got {epsilon}, {c}"
                ))
            }
            DesignKind::ClippedDecay { beta, base } => {
                if !(0.0..=1.0).contains(beta) {
                    return fail(format!("beta must be in [0,1], got {beta}"));
                }
                base.validate()
            }
            DesignKind::GammaMixture { gamma, base } => {
                if !(*gamma > 0.0 && *gamma <= 1.0) {
                    return fail(format!("gamma must be in (0,1], got {gamma}"));
                }
                base.validate()
            }
            DesignKind::BatchedThompson { batch_size } if *batch_size == 0 => {
                fail("batch_size must be at least 1".into())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        let params = self.params();
        if !params.is_empty() {
            f.write_str("(")?;
            for (i, (k, v)) in params.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{k}={v}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A validated policy template over a fixed number of arms.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    kind: DesignKind,
    arms: usize,
}

impl DesignSpec {
    pub fn new(kind: DesignKind, arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidDesign("K must be at least 1".into()));
        }
        kind.validate()?;
        Ok(Self { kind, arms })
    }

    pub fn kind(&self) -> &DesignKind {
        &self.kind
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    /// Fresh state for a run of length `horizon`.
    pub fn start(&self, horizon: usize) -> DesignState {
        DesignState::new(self, horizon)
    }

    /// Precomputes horizon-dependent tables so that many runs of the same length
    /// can start cheaply.
    pub fn plan(&self, horizon: usize) -> DesignPlan {
        DesignPlan {
            template: DesignState::new(self, horizon),
        }
    }
}

/// A design bound to a horizon; [`DesignPlan::start`] hands out fresh states that
/// share the precomputed tables.
#[derive(Debug, Clone)]
pub struct DesignPlan {
    template: DesignState,
}

impl DesignPlan {
    pub fn start(&self) -> DesignState {
        self.template.clone()
    }
}

/// Running statistics visible to every policy node.
#[derive(Debug, Clone)]
struct Counts {
    pulls: Vec<u64>,
    sums: Vec<f64>,
    // sums / pulls, kept in step with every update; 0 for unpulled arms
    means: Vec<f64>,
    // 1-based index of the step about to be chosen
    t: usize,
    horizon: usize,
}

impl Counts {
    #[inline]
    fn arms(&self) -> usize {
        self.pulls.len()
    }

    /// Lowest-index never-pulled arm, if any (0-based).
    #[inline]
    fn first_unpulled(&self) -> Option<usize> {
        self.pulls.iter().position(|&n| n == 0)
    }

    /// Argmax of the sample mean, never-pulled arms first (0-based).
    fn greedy(&self) -> usize {
        if let Some(a) = self.first_unpulled() {
            return a;
        }
        argmax(self.means.iter().copied())
    }
}

/// Index of the largest value; ties and NaNs resolve to the lowest index.
#[inline]
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

#[inline]
fn uniform_arm<R: Rng + ?Sized>(arms: usize, rng: &mut R) -> usize {
    if arms == 1 {
        0
    } else {
        rng.random_range(0..arms)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Etc {
        explore_len: usize,
        exploration: Exploration,
        committed: Option<usize>,
    },
    Ucb {
        two_log_t: f64,
        bonus: Vec<f64>,
        // mean + bonus
        score: Vec<f64>,
    },
    EpsGreedy {
        epsilon: f64,
        c: f64,
    },
    ClippedDecay {
        // clip[t] = t^{-β}
        clip: Arc<[f64]>,
        base: Box<Node>,
        forced: u64,
    },
    GammaMixture {
        gamma: f64,
        base: Box<Node>,
        forced: u64,
    },
    Thompson {
        batch_size: usize,
        clamped_sums: Vec<f64>,
        posteriors: Vec<(f64, f64)>,
        samplers: Vec<Beta<f64>>,
    },
    FixedUniform,
}

fn beta_sampler(a: f64, b: f64) -> Beta<f64> {
    // a, b >= 1 by construction
    Beta::new(a, b).expect("posterior parameters are positive")
}

impl Node {
    fn build(kind: &DesignKind, arms: usize, horizon: usize) -> Node {
        match kind {
            DesignKind::Etc {
                explore_fraction,
                exploration,
            } => {
                let explore_len = libm::floor(explore_fraction * horizon as f64) as usize;
                Node::Etc {
                    explore_len,
                    exploration: *exploration,
                    // nothing to explore: commit to the tie-break winner
                    committed: (explore_len == 0).then_some(0),
                }
            }
            DesignKind::Ucb => Node::Ucb {
                two_log_t: 2.0 * math::ln(horizon.max(1) as f64),
                bonus: vec![f64::INFINITY; arms],
                score: vec![f64::INFINITY; arms],
            },
            DesignKind::EpsGreedy { epsilon, c } => Node::EpsGreedy {
                epsilon: *epsilon,
                c: *c,
            },
            DesignKind::ClippedDecay { beta, base } => Node::ClippedDecay {
                clip: (0..=horizon).map(|t| clip_probability(t, *beta)).collect(),
                base: Box::new(Node::build(base, arms, horizon)),
                forced: 0,
            },
            DesignKind::GammaMixture { gamma, base } => Node::GammaMixture {
                gamma: *gamma,
                base: Box::new(Node::build(base, arms, horizon)),
                forced: 0,
            },
            DesignKind::BatchedThompson { batch_size } => Node::Thompson {
                batch_size: *batch_size,
                clamped_sums: vec![0.0; arms],
                posteriors: vec![(1.0, 1.0); arms],
                samplers: vec![beta_sampler(1.0, 1.0); arms],
            },
            DesignKind::FixedUniform => Node::FixedUniform,
        }
    }

    fn select<R: Rng + ?Sized>(&mut self, c: &Counts, rng: &mut R) -> usize {
        let arms = c.arms();
        match self {
            Node::Etc {
                explore_len,
                exploration,
                committed,
            } => {
                if c.t <= *explore_len {
                    match exploration {
                        Exploration::Uniform => uniform_arm(arms, rng),
                        Exploration::RoundRobin => (c.t - 1) % arms,
                    }
                } else {
                    committed.expect("ETC commits when the explore phase ends")
                }
            }
            Node::Ucb { score, .. } => {
                if let Some(a) = c.first_unpulled() {
                    return a;
                }
                argmax(score.iter().copied())
            }
            Node::EpsGreedy { epsilon, c: decay } => {
                let p = (*epsilon + *decay / c.t as f64).min(1.0);
                if p > 0.0 && rng.random::<f64>() < p {
                    uniform_arm(arms, rng)
                } else {
                    c.greedy()
                }
            }
            Node::ClippedDecay { clip, base, forced } => {
                let b: f64 = rng.random();
                if b <= clip[c.t] {
                    *forced += 1;
                    uniform_arm(arms, rng)
                } else {
                    base.select(c, rng)
                }
            }
            Node::GammaMixture {
                gamma,
                base,
                forced,
            } => {
                let b: f64 = rng.random();
                if b < *gamma {
                    *forced += 1;
                    uniform_arm(arms, rng)
                } else {
                    base.select(c, rng)
                }
            }
            Node::Thompson { samplers, .. } => argmax(samplers.iter().map(|s| s.sample(rng))),
            Node::FixedUniform => uniform_arm(arms, rng),
        }
    }

    /// Hook run after the shared counts absorbed `(arm, x)`; `c.t` is already the
    /// next step.
    fn observe(&mut self, c: &Counts, arm: usize, x: f64) {
        match self {
            Node::Etc {
                explore_len,
                committed,
                ..
            } => {
                if committed.is_none() && c.t == *explore_len + 1 {
                    *committed = Some(c.greedy_defined());
                }
            }
            Node::Ucb {
                two_log_t,
                bonus,
                score,
            } => {
                bonus[arm] = math::sqrt(*two_log_t / c.pulls[arm] as f64);
                score[arm] = c.means[arm] + bonus[arm];
            }
            Node::ClippedDecay { base, .. } | Node::GammaMixture { base, .. } => {
                base.observe(c, arm, x)
            }
            Node::Thompson {
                batch_size,
                clamped_sums,
                posteriors,
                samplers,
            } => {
                clamped_sums[arm] += x.clamp(0.0, 1.0);
                let done = c.t - 1;
                if done.is_multiple_of(*batch_size) {
                    for a in 0..c.arms() {
                        let s = clamped_sums[a];
                        let n = c.pulls[a] as f64;
                        posteriors[a] = (1.0 + s, 1.0 + (n - s).max(0.0));
                        samplers[a] = beta_sampler(posteriors[a].0, posteriors[a].1);
                    }
                }
            }
            Node::EpsGreedy { .. } | Node::FixedUniform => {}
        }
    }

    fn forced_uniform(&self) -> u64 {
        match self {
            Node::ClippedDecay { forced, base, .. } | Node::GammaMixture { forced, base, .. } => {
                *forced + base.forced_uniform()
            }
            _ => 0,
        }
    }

    fn committed(&self) -> Option<usize> {
        match self {
            Node::Etc { committed, .. } => *committed,
            Node::ClippedDecay { base, .. } | Node::GammaMixture { base, .. } => base.committed(),
            _ => None,
        }
    }

    fn posteriors(&self) -> Option<&[(f64, f64)]> {
        match self {
            Node::Thompson { posteriors, .. } => Some(posteriors),
            Node::ClippedDecay { base, .. } | Node::GammaMixture { base, .. } => base.posteriors(),
            _ => None,
        }
    }
}

impl Counts {
    /// Argmax over arms with at least one pull; unpulled arms rank last.
    fn greedy_defined(&self) -> usize {
        argmax((0..self.arms()).map(|a| {
            if self.pulls[a] == 0 {
                f64::NEG_INFINITY
            } else {
                self.means[a]
            }
        }))
    }
}

/// A design instantiated for one run of a fixed horizon.
///
/// The state after any prefix is a pure function of the spec, the prefix, and the
/// random words consumed so far.
#[derive(Debug, Clone)]
pub struct DesignState {
    counts: Counts,
    node: Node,
}

impl DesignState {
    pub fn new(spec: &DesignSpec, horizon: usize) -> Self {
        Self {
            counts: Counts {
                pulls: vec![0; spec.arms],
                sums: vec![0.0; spec.arms],
                means: vec![0.0; spec.arms],
                t: 1,
                horizon,
            },
            node: Node::build(&spec.kind, spec.arms, horizon),
        }
    }

    /// Chooses the arm (1-based) for the current step.
    pub fn select_arm<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        if self.counts.t > self.counts.horizon {
            return Err(Error::HorizonExceeded {
                t: self.counts.t,
                horizon: self.counts.horizon,
            });
        }
        Ok(self.node.select(&self.counts, rng) + 1)
    }

    /// Records the outcome of the arm (1-based) just pulled and advances `t`.
    pub fn update(&mut self, arm: usize, outcome: f64) {
        let a = arm - 1;
        self.counts.pulls[a] += 1;
        self.counts.sums[a] += outcome;
        self.counts.means[a] = self.counts.sums[a] / self.counts.pulls[a] as f64;
        self.counts.t += 1;
        self.node.observe(&self.counts, a, outcome);
    }

    /// Index of the step about to be chosen (1-based).
    pub fn t(&self) -> usize {
        self.counts.t
    }

    pub fn horizon(&self) -> usize {
        self.counts.horizon
    }

    pub fn pulls(&self) -> &[u64] {
        &self.counts.pulls
    }

    /// Running sample means; `None` for unpulled arms.
    pub fn means(&self) -> Vec<Option<f64>> {
        self.counts
            .pulls
            .iter()
            .zip(&self.counts.means)
            .map(|(&n, &m)| (n > 0).then_some(m))
            .collect()
    }

    /// ETC's committed arm (1-based), once the explore phase has ended.
    pub fn committed_arm(&self) -> Option<usize> {
        self.node.committed().map(|a| a + 1)
    }

    /// How many steps the uniform branch of a clipping/mixture wrapper was taken.
    pub fn forced_uniform_count(&self) -> u64 {
        self.node.forced_uniform()
    }

    /// Current Beta posterior parameters for batched Thompson sampling.
    pub fn thompson_posteriors(&self) -> Option<&[(f64, f64)]> {
        self.node.posteriors()
    }

    #[cfg(test)]
    pub(crate) fn ucb_bonus(&self, arm: usize) -> Option<f64> {
        match &self.node {
            Node::Ucb { bonus, .. } => Some(bonus[arm - 1]),
            _ => None,
        }
    }
}

/// A named, documented design template.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub kind: DesignKind,
}

impl CatalogEntry {
    pub fn spec(&self, arms: usize) -> Result<DesignSpec> {
        DesignSpec::new(self.kind.clone(), arms)
    }
}

pub fn design_catalog() -> Vec<CatalogEntry> {
    let greedy = || DesignKind::EpsGreedy {
        epsilon: 0.0,
        c: 0.0,
    };
    vec![
        CatalogEntry {
            name: "etc",
            summary: "explore uniformly at random for T/2 steps, then commit to the best sample mean",
            kind: DesignKind::Etc {
                explore_fraction: 0.5,
                exploration: Exploration::Uniform,
            },
        },
        CatalogEntry {
            name: "etc_appc",
            summary: "pull each arm T/(5K) times in rotation, commit at T/5",
            kind: DesignKind::Etc {
                explore_fraction: 0.2,
                exploration: Exploration::RoundRobin,
            },
        },
        CatalogEntry {
            name: "ucb",
            summary: "argmax of mean + sqrt(2 ln T / N); unpulled arms first",
            kind: DesignKind::Ucb,
        },
        CatalogEntry {
            name: "clipped_ucb",
            summary: "UCB with uniform exploration at rate t^-0.7",
            kind: DesignKind::ClippedDecay {
                beta: 0.7,
                base: Box::new(DesignKind::Ucb),
            },
        },
        CatalogEntry {
            name: "eps_greedy",
            summary: "greedy on sample means, uniform with probability min(1, epsilon + c/t)",
            kind: greedy(),
        },
        CatalogEntry {
            name: "clipped_greedy",
            summary: "greedy with uniform exploration at rate t^-0.7",
            kind: DesignKind::ClippedDecay {
                beta: 0.7,
                base: Box::new(greedy()),
            },
        },
        CatalogEntry {
            name: "gamma_mixture",
            summary: "uniform with probability gamma, else greedy exploring with probability min(1, c/t)",
            kind: DesignKind::GammaMixture {
                gamma: 0.1,
                base: Box::new(DesignKind::EpsGreedy {
                    epsilon: 0.0,
                    c: 1.0,
                }),
            },
        },
        CatalogEntry {
            name: "batched_thompson",
            summary: "Beta(1,1)-Bernoulli Thompson sampling, posteriors refreshed every batch_size rounds",
            kind: DesignKind::BatchedThompson { batch_size: 100 },
        },
        CatalogEntry {
            name: "fixed_uniform",
            summary: "non-adaptive uniform allocation",
            kind: DesignKind::FixedUniform,
        },
    ]
}

/// `√(2 ln T / n)`, the UCB exploration bonus.
pub fn ucb_bonus(horizon: usize, pulls: u64) -> f64 {
    math::sqrt(2.0 * math::ln(horizon as f64) / pulls as f64)
}

/// `t^{-β}`, the probability of the uniform branch in a decaying clip.
pub fn clip_probability(t: usize, beta: f64) -> f64 {
    math::powf(t as f64, -beta)
}
