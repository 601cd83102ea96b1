//! Run configuration: TOML files, command-line shorthands, and validation.
//!
//! A config file looks like
//!
//! ```toml
//! T = 500
//! alpha = 0.1
//! B = 200
//! bias = "bias1"
//! seed = 7
//!
//! [design]
//! kind = "clipped_ucb"
//! params = { beta = 0.7 }
//!
//! [arms]
//! family = "bernoulli"
//! means = [0.45, 0.5, 0.55]
//!
//! [target]
//! arm = 1
//!
//! [grid]
//! lo = 0.0
//! hi = 1.0
//! count = 100
//! ```
//!
//! Command-line flags take precedence over the file. Every value is checked
//! before any simulation starts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use optimist_core::{linspace, ArmModel, BiasKind, DesignKind, DesignSpec, SeedMode, Target};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_GRID_COUNT: usize = 100;

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::config(format!("`{field}`: {msg}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    /// Catalog name or raw kind, see `optimist designs`.
    pub kind: String,
    /// Number of arms; may be omitted when an arm model fixes it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, toml::Value>,
}

fn flatten_params(
    prefix: &str,
    table: &BTreeMap<String, toml::Value>,
    out: &mut Vec<(String, String)>,
) -> Result<()> {
    for (k, v) in table {
        let key = format!("{prefix}{k}");
        let s = match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            toml::Value::Table(t) => {
                let sub: BTreeMap<_, _> = t.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                flatten_params(&format!("{key}."), &sub, out)?;
                continue;
            }
            other => {
                return Err(field_err(
                    &format!("design.params.{key}"),
                    format!("unsupported value {other}"),
                ))
            }
        };
        out.push((key, s));
    }
    Ok(())
}

impl DesignBlock {
    pub fn named(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            arms: None,
            params: BTreeMap::new(),
        }
    }

    pub fn design_kind(&self) -> Result<DesignKind> {
        let mut flat = Vec::new();
        flatten_params("", &self.params, &mut flat)?;
        let pairs: Vec<(&str, &str)> = flat.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        DesignKind::from_key_values(&self.kind, &pairs).map_err(|e| field_err("design", e))
    }

    pub fn spec(&self, arms: usize) -> Result<DesignSpec> {
        DesignSpec::new(self.design_kind()?, arms).map_err(|e| field_err("design", e))
    }

    /// The block with every parameter spelled out, for manifests.
    pub fn echo(spec: &DesignSpec, kind_name: &str) -> Self {
        Self {
            kind: kind_name.to_string(),
            arms: Some(spec.arms()),
            params: spec
                .kind()
                .params()
                .into_iter()
                .map(|(k, v)| (k, toml::Value::String(v)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<usize>,
    /// `[a, b]` for `μ_a − μ_b`; arm `a` supplies the statistic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
}

impl TargetBlock {
    pub fn target(&self) -> Result<Target> {
        match (self.arm, self.diff) {
            (Some(a), None) => Ok(Target::ArmMean(a)),
            (None, Some([arm, other])) => Ok(Target::DiffMeans { arm, other }),
            (None, None) => Err(field_err("target", "set either `arm` or `diff`")),
            (Some(_), Some(_)) => Err(field_err("target", "`arm` and `diff` are exclusive")),
        }
    }

    pub fn from_target(target: Target, theta0: Option<f64>) -> Self {
        match target {
            Target::ArmMean(a) => Self {
                arm: Some(a),
                diff: None,
                theta0,
            },
            Target::DiffMeans { arm, other } => Self {
                arm: None,
                diff: Some([arm, other]),
                theta0,
            },
        }
    }
}

/// Null grid: `count` evenly spaced values on `[lo, hi]`, or an explicit list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl GridBlock {
    pub fn range(lo: f64, hi: f64, count: usize) -> Self {
        Self {
            lo: Some(lo),
            hi: Some(hi),
            count: Some(count),
            values: None,
        }
    }

    /// Default grid for a target: `[0, 1]` for a mean, `[−1, 1]` for a difference.
    pub fn default_for(target: Target) -> Self {
        match target {
            Target::ArmMean(_) => Self::range(0.0, 1.0, DEFAULT_GRID_COUNT),
            Target::DiffMeans { .. } => Self::range(-1.0, 1.0, DEFAULT_GRID_COUNT),
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let grid = match (&self.values, self.lo, self.hi, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), count) => {
                let count = count.unwrap_or(DEFAULT_GRID_COUNT);
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(field_err(
                        "grid",
                        format!("need finite lo <= hi, got [{lo}, {hi}]"),
                    ));
                }
                linspace(lo, hi, count)
            }
            (Some(_), ..) => return Err(field_err("grid", "`values` excludes lo/hi/count")),
            _ => {
                return Err(field_err(
                    "grid",
                    "set `lo` and `hi` (and optionally `count`), or `values`",
                ))
            }
        };
        if grid.is_empty() {
            return Err(field_err("grid", "no null values"));
        }
        if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(field_err(
                "grid",
                "values must be finite and sorted ascending",
            ));
        }
        Ok(grid)
    }
}

/// True arm distributions, for simulation and synthetic experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmsBlock {
    /// `bernoulli` or `gaussian`.
    pub family: String,
    pub means: Vec<f64>,
    /// Gaussian standard deviations, default 1 for every arm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<Vec<f64>>,
}

impl ArmsBlock {
    pub fn model(&self) -> Result<ArmModel> {
        let m = match self.family.as_str() {
            "bernoulli" => {
                if self.sd.is_some() {
                    return Err(field_err("arms.sd", "not used by the bernoulli family"));
                }
                ArmModel::bernoulli(self.means.clone())
            }
            "gaussian" => {
                let sds = self
                    .sd
                    .clone()
                    .unwrap_or_else(|| vec![1.0; self.means.len()]);
                ArmModel::gaussian(self.means.clone(), sds)
            }
            other => {
                return Err(field_err(
                    "arms.family",
                    format!("unknown family `{other}`"),
                ))
            }
        };
        m.map_err(|e| field_err("arms", e))
    }

    /// Parses `bernoulli:0.5,0.5` or `gaussian:0,0` / `gaussian:0,0/1,2` (means/sds).
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || field_err("arms", format!("expected `family:m1,m2,...`, got `{s}`"));
        let (family, rest) = s.split_once(':').ok_or_else(bad)?;
        let (means, sd) = match rest.split_once('/') {
            Some((m, sd)) => (m, Some(sd)),
            None => (rest, None),
        };
        Ok(Self {
            family: family.trim().to_string(),
            means: parse_list(means).map_err(|_| bad())?,
            sd: sd.map(parse_list).transpose().map_err(|_| bad())?,
        })
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    s.split(',').map(|v| v.trim().parse::<f64>()).collect()
}

/// Parses `arm:1`, a bare `1`, or `diff:1,2`.
pub fn parse_target(s: &str) -> Result<TargetBlock> {
    let bad = || {
        field_err(
            "target",
            format!("expected `arm:N` or `diff:A,B`, got `{s}`"),
        )
    };
    let (kind, rest) = s.split_once(':').unwrap_or(("arm", s));
    match kind.trim() {
        "arm" => Ok(TargetBlock {
            arm: Some(rest.trim().parse().map_err(|_| bad())?),
            ..Default::default()
        }),
        "diff" => {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            Ok(TargetBlock {
                diff: Some([
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                ]),
                ..Default::default()
            })
        }
        _ => Err(bad()),
    }
}

/// Parses `lo:hi:count`, `lo:hi`, or an explicit comma list.
pub fn parse_grid(s: &str) -> Result<GridBlock> {
    let bad = || {
        field_err(
            "grid",
            format!("expected `lo:hi:count` or `v1,v2,...`, got `{s}`"),
        )
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            [lo, hi] => Ok(GridBlock::range(num(lo)?, num(hi)?, DEFAULT_GRID_COUNT)),
            [lo, hi, n] => Ok(GridBlock::range(
                num(lo)?,
                num(hi)?,
                n.parse().map_err(|_| bad())?,
            )),
            _ => Err(bad()),
        }
    } else {
        Ok(GridBlock {
            values: Some(parse_list(s).map_err(|_| bad())?),
            ..Default::default()
        })
    }
}

pub fn parse_bias(s: &str) -> Result<BiasKind> {
    BiasKind::from_name(s.trim()).ok_or_else(|| {
        field_err(
            "bias",
            format!(
                "unknown bias `{s}`, expected one of {}",
                BIAS_NAMES.join(", ")
            ),
        )
    })
}

pub const BIAS_NAMES: [&str; 4] = ["bias1", "bias2", "bias3", "plugin"];

pub fn parse_seed_mode(s: &str) -> Result<SeedMode> {
    match s.trim() {
        "common" => Ok(SeedMode::Common),
        "disjoint" => Ok(SeedMode::Disjoint),
        _ => Err(field_err(
            "seed_mode",
            format!("expected `common` or `disjoint`, got `{s}`"),
        )),
    }
}

pub fn seed_mode_name(m: SeedMode) -> &'static str {
    match m {
        SeedMode::Common => "common",
        SeedMode::Disjoint => "disjoint",
    }
}

/// Everything a single `simulate`, `test` or `ci` run can be configured with.
/// All fields are optional here; [`RunConfig::resolve`] applies defaults and checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<ArmsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
}

/// A fully checked [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Settings {
    pub design: DesignSpec,
    pub design_name: String,
    pub model: Option<ArmModel>,
    pub arms_block: Option<ArmsBlock>,
    pub target: Target,
    pub theta0: Option<f64>,
    pub horizon: Option<usize>,
    pub alpha: f64,
    pub replicates: usize,
    pub grid: GridBlock,
    pub bias: BiasKind,
    pub seed_mode: SeedMode,
    pub seed: u64,
    /// Whether the seed was drawn because none was given.
    pub seed_sampled: bool,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Field-wise merge; values set in `over` win.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        let target = match (self.target, over.target) {
            (Some(base), Some(o)) => Some(TargetBlock {
                theta0: o.theta0.or(base.theta0),
                ..if o.arm.is_some() || o.diff.is_some() {
                    o
                } else {
                    base
                }
            }),
            (b, o) => o.or(b),
        };
        RunConfig {
            horizon: over.horizon.or(self.horizon),
            alpha: over.alpha.or(self.alpha),
            replicates: over.replicates.or(self.replicates),
            bias: over.bias.or(self.bias),
            seed_mode: over.seed_mode.or(self.seed_mode),
            seed: over.seed.or(self.seed),
            workers: over.workers.or(self.workers),
            out: over.out.or(self.out),
            design: over.design.or(self.design),
            arms: over.arms.or(self.arms),
            target,
            grid: over.grid.or(self.grid),
        }
    }

    /// Applies defaults and validates every field. A missing seed is sampled.
    pub fn resolve(&self) -> Result<Settings> {
        let design_block = self.design.as_ref().ok_or_else(|| {
            field_err(
                "design",
                "required; the design that generated the data must be stated",
            )
        })?;
        let model = self.arms.as_ref().map(ArmsBlock::model).transpose()?;
        let arms = match (design_block.arms, &model) {
            (Some(k), Some(m)) if k != m.arms() => {
                return Err(field_err(
                    "design.arms",
                    format!("{k} arms but the arm model has {}", m.arms()),
                ))
            }
            (Some(k), _) => k,
            (None, Some(m)) => m.arms(),
            (None, None) => {
                return Err(field_err(
                    "design.arms",
                    "number of arms unknown; set it or give an arm model",
                ))
            }
        };
        let design = design_block.spec(arms)?;

        let mut target_block = self.target.clone().unwrap_or_default();
        if target_block.arm.is_none() && target_block.diff.is_none() {
            target_block.arm = Some(1);
        }
        let target = target_block.target()?;
        target.validate(arms).map_err(|e| field_err("target", e))?;
        if let Some(t0) = target_block.theta0 {
            if !t0.is_finite() {
                return Err(field_err("target.theta0", "must be finite"));
            }
        }

        let alpha = self.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(field_err("alpha", format!("must be in (0,1), got {alpha}")));
        }
        let replicates = self.replicates.unwrap_or(DEFAULT_REPLICATES);
        if replicates == 0 {
            return Err(field_err("B", "must be at least 1"));
        }
        let grid = self
            .grid
            .clone()
            .unwrap_or_else(|| GridBlock::default_for(target));
        grid.values()?;
        let bias = parse_bias(self.bias.as_deref().unwrap_or("bias1"))?;
        let seed_mode = parse_seed_mode(self.seed_mode.as_deref().unwrap_or("common"))?;
        if self.workers == Some(0) {
            return Err(field_err("workers", "must be at least 1"));
        }
        let (seed, seed_sampled) = match self.seed {
            Some(s) => (s, false),
            None => (rand::random::<u64>(), true),
        };
        Ok(Settings {
            design,
            design_name: design_block.kind.clone(),
            model,
            arms_block: self.arms.clone(),
            target,
            theta0: target_block.theta0,
            horizon: self.horizon,
            alpha,
            replicates,
            grid,
            bias,
            seed_mode,
            seed,
            seed_sampled,
            workers: self.workers,
            out: self.out.clone(),
        })
    }
}

impl Settings {
    /// The config with every default filled in, suitable for replaying the run.
    pub fn echo(&self) -> RunConfig {
        RunConfig {
            horizon: self.horizon,
            alpha: Some(self.alpha),
            replicates: Some(self.replicates),
            bias: Some(self.bias.label().to_string()),
            seed_mode: Some(seed_mode_name(self.seed_mode).to_string()),
            seed: Some(self.seed),
            workers: self.workers,
            out: self.out.clone(),
            design: Some(DesignBlock::echo(&self.design, &self.design_name)),
            arms: self.arms_block.clone(),
            target: Some(TargetBlock::from_target(self.target, self.theta0)),
            grid: Some(self.grid.clone()),
        }
    }

    pub fn grid_values(&self) -> Vec<f64> {
        self.grid.values().expect("grid checked in resolve")
    }
}
