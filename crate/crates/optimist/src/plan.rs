//! Experiment plans: the sweep axes, true arm setups and pass/fail checks of a
//! harness run, stored as TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use optimist_core::{ArmModel, BiasKind, DesignSpec, SeedMode, Target};

use crate::config::{parse_bias, parse_seed_mode, ArmsBlock, DesignBlock, GridBlock, TargetBlock};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    /// Rejection rate of the true null against nominal α.
    Calibration,
    /// Coverage, width and error of confidence intervals, with a Wald baseline.
    Sweep,
    /// Type I error and near-null power per bias kind.
    BiasAblation,
    /// Wall-clock per confidence interval over grid sizes and simulation counts.
    RuntimeScaling,
}

/// One true arm configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setup {
    pub name: String,
    pub family: String,
    pub means: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<Vec<f64>>,
}

impl Setup {
    pub fn model(&self) -> Result<ArmModel> {
        ArmsBlock {
            family: self.family.clone(),
            means: self.means.clone(),
            sd: self.sd.clone(),
        }
        .model()
        .map_err(|e| Error::config(format!("setup `{}`: {e}", self.name)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeBlock {
    #[serde(rename = "G")]
    pub grid_sizes: Vec<usize>,
    #[serde(rename = "B")]
    pub replicates: Vec<usize>,
    /// Interleaved timing passes; the fastest is kept.
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn default_repeats() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Every selected value lies in `[min, max]`.
    Bound,
    /// Every selected `|value| ≤ k·se`.
    WithinSe,
    /// Every selected `value ≤ k·se`; one-sided, for error rates that may fall
    /// below nominal.
    AtMostSe,
    /// Values strictly decrease with `T` within each setup, method and α.
    Decreasing,
    /// `left op factor·right` wherever both methods have a row.
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmpOp {
    Gt,
    Ge,
    Lt,
    Le,
}

impl CmpOp {
    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

/// A pass/fail condition over the metric rows of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub rule: Rule,
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<CmpOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub name: String,
    pub kind: PlanKind,
    pub seed: u64,
    /// Outer replications `R`.
    pub reps: usize,
    #[serde(rename = "T")]
    pub horizons: Vec<usize>,
    pub alphas: Vec<f64>,
    #[serde(rename = "B")]
    pub replicates: usize,
    #[serde(default = "default_biases")]
    pub biases: Vec<String>,
    /// Tested nulls relative to the true value, for calibration and ablation.
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
    #[serde(default = "default_seed_mode")]
    pub seed_mode: String,
    pub design: DesignBlock,
    pub target: TargetBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    #[serde(rename = "setup")]
    pub setups: Vec<Setup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime: Option<RuntimeBlock>,
    #[serde(rename = "check", default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

fn default_biases() -> Vec<String> {
    vec!["bias1".into()]
}

fn default_offsets() -> Vec<f64> {
    vec![0.0]
}

fn default_seed_mode() -> String {
    "common".into()
}

impl ExperimentPlan {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let plan: Self = toml::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks every field; called on load and again before a run.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::config(format!("plan `{}`: {msg}", self.name)));
        if self.reps == 0 {
            return fail("`reps` must be at least 1".into());
        }
        if self.replicates == 0 {
            return fail("`B` must be at least 1".into());
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return fail("`T` needs at least one positive horizon".into());
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return fail("`alphas` must be non-empty, each in (0,1)".into());
        }
        if self.setups.is_empty() {
            return fail("at least one [[setup]] is required".into());
        }
        if self.offsets.iter().any(|o| !o.is_finite()) {
            return fail("`offsets` must be finite".into());
        }
        self.bias_kinds()?;
        self.seed_mode()?;
        let target = self.target()?;
        for s in &self.setups {
            let m = s.model()?;
            self.design_spec(m.arms())?;
            target.validate(m.arms()).map_err(|e| {
                Error::config(format!("plan `{}`: setup `{}`: {e}", self.name, s.name))
            })?;
        }
        if let Some(g) = &self.grid {
            g.values()?;
        }
        match self.kind {
            PlanKind::Sweep if self.grid.is_none() => {
                return fail("sweep plans need a [grid]".into())
            }
            PlanKind::RuntimeScaling => match &self.runtime {
                None => return fail("runtime_scaling plans need a [runtime] block".into()),
                Some(r) if r.grid_sizes.is_empty() || r.replicates.is_empty() || r.repeats == 0 => {
                    return fail("[runtime] needs non-empty G and B and repeats >= 1".into())
                }
                Some(r) if r.grid_sizes.contains(&0) || r.replicates.contains(&0) => {
                    return fail("[runtime] G and B must be positive".into())
                }
                _ => {}
            },
            _ => {}
        }
        for c in &self.checks {
            let ok = match c.rule {
                Rule::Bound => c.min.is_some() || c.max.is_some(),
                Rule::WithinSe | Rule::AtMostSe => c.k.is_some(),
                Rule::Decreasing => true,
                Rule::Compare => c.left.is_some() && c.right.is_some() && c.op.is_some(),
            };
            if !ok {
                return fail(format!(
                    "check on `{}` is missing fields for its rule",
                    c.metric
                ));
            }
        }
        Ok(())
    }

    pub fn target(&self) -> Result<Target> {
        self.target.target()
    }

    pub fn design_spec(&self, arms: usize) -> Result<DesignSpec> {
        self.design.spec(arms)
    }

    pub fn bias_kinds(&self) -> Result<Vec<BiasKind>> {
        if self.biases.is_empty() {
            return Err(Error::config(format!(
                "plan `{}`: `biases` is empty",
                self.name
            )));
        }
        self.biases.iter().map(|b| parse_bias(b)).collect()
    }

    pub fn seed_mode(&self) -> Result<SeedMode> {
        parse_seed_mode(&self.seed_mode)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }

    /// SHA-256 of the canonical TOML form, first 16 hex digits.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Setup, method, α and the `(T, value)` points of one decreasing-check group.
type Series<'a> = (&'a str, &'a str, f64, Vec<(usize, f64)>);

/// Outcome of one [`Check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            let rule = match self.rule {
                Rule::Bound => "bound",
                Rule::WithinSe => "within_se",
                Rule::AtMostSe => "at_most_se",
                Rule::Decreasing => "decreasing",
                Rule::Compare => "compare",
            };
            format!("{rule}:{}", self.metric)
        })
    }

    fn selects(&self, r: &crate::harness::MetricRow) -> bool {
        r.metric == self.metric
            && self.setup.as_ref().is_none_or(|s| *s == r.setup)
            && self.t.is_none_or(|t| t == r.t)
            && self.alpha.is_none_or(|a| (a - r.alpha).abs() < 1e-12)
    }

    pub fn evaluate(&self, rows: &[crate::harness::MetricRow]) -> CheckResult {
        let label = self.label();
        let sel: Vec<_> = rows
            .iter()
            .filter(|r| self.selects(r))
            .filter(|r| {
                self.rule == Rule::Compare || self.method.as_ref().is_none_or(|m| *m == r.method)
            })
            .collect();
        if sel.is_empty() {
            return CheckResult {
                label,
                pass: false,
                detail: "no rows matched".into(),
            };
        }
        let mut bad = Vec::new();
        match self.rule {
            Rule::Bound => {
                let (lo, hi) = (
                    self.min.unwrap_or(f64::NEG_INFINITY),
                    self.max.unwrap_or(f64::INFINITY),
                );
                for r in &sel {
                    if !(r.value >= lo && r.value <= hi) {
                        bad.push(format!(
                            "{} T={} {}={:.4} outside [{lo}, {hi}]",
                            r.setup, r.t, r.method, r.value
                        ));
                    }
                }
            }
            Rule::WithinSe | Rule::AtMostSe => {
                let k = self.k.unwrap_or(3.0);
                for r in &sel {
                    let se = r.se.unwrap_or(f64::NAN);
                    let v = if self.rule == Rule::WithinSe {
                        r.value.abs()
                    } else {
                        r.value
                    };
                    // NaN SE fails the check
                    let inside = v <= k * se;
                    if !inside {
                        bad.push(format!(
                            "{} T={} {} α={}: {:.4} > {k}·{:.4}",
                            r.setup, r.t, r.method, r.alpha, v, se
                        ));
                    }
                }
            }
            Rule::Decreasing => {
                let mut groups: Vec<Series> = Vec::new();
                for r in &sel {
                    match groups
                        .iter_mut()
                        .find(|g| g.0 == r.setup && g.1 == r.method && g.2 == r.alpha)
                    {
                        Some(g) => g.3.push((r.t, r.value)),
                        None => groups.push((&r.setup, &r.method, r.alpha, vec![(r.t, r.value)])),
                    }
                }
                for (setup, method, _, mut pts) in groups {
                    pts.sort_by_key(|p| p.0);
                    for w in pts.windows(2) {
                        let down = w[1].1 < w[0].1;
                        if !down {
                            bad.push(format!(
                                "{setup} {method}: T={} {:.5} !> T={} {:.5}",
                                w[0].0, w[0].1, w[1].0, w[1].1
                            ));
                        }
                    }
                }
            }
            Rule::Compare => {
                let (left, right) = (
                    self.left.as_deref().unwrap(),
                    self.right.as_deref().unwrap(),
                );
                let op = self.op.unwrap();
                let factor = self.factor.unwrap_or(1.0);
                let mut pairs = 0;
                for l in sel.iter().filter(|r| r.method == left) {
                    let Some(r) = sel.iter().find(|r| {
                        r.method == right && r.setup == l.setup && r.t == l.t && r.alpha == l.alpha
                    }) else {
                        continue;
                    };
                    pairs += 1;
                    if !op.holds(l.value, factor * r.value) {
                        bad.push(format!(
                            "{} T={} α={}: {left} {:.5} not {} {factor}·{right} {:.5}",
                            l.setup,
                            l.t,
                            l.alpha,
                            l.value,
                            op.symbol(),
                            r.value
                        ));
                    }
                }
                if pairs == 0 {
                    bad.push(format!("no {left}/{right} pairs"));
                }
            }
        }
        CheckResult {
            label,
            pass: bad.is_empty(),
            detail: if bad.is_empty() {
                format!("{} rows ok", sel.len())
            } else {
                bad.join("; ")
            },
        }
    }
}
