//! JSON documents written by the command-line tool.
//!
//! A point-null test is `{theta0, cdf_value, reject, ...}`; a confidence
//! interval is `{interval: [lo, hi], accepted: [...], point_estimate,
//! per_null: [...], ...}` with one test document per grid value in `per_null`.

use serde::Serialize;

use optimist_core::{ConfidenceResult, TestOutcome};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub theta0: f64,
    pub cdf_value: f64,
    pub reject: bool,
    pub observed_stat: f64,
    pub alpha: f64,
    pub b_effective: usize,
    pub excluded: usize,
}

impl From<&TestOutcome> for TestReport {
    fn from(o: &TestOutcome) -> Self {
        Self {
            theta0: o.theta0,
            cdf_value: o.cdf_value,
            reject: o.reject,
            observed_stat: o.observed_stat,
            alpha: o.alpha,
            b_effective: o.b_effective,
            excluded: o.excluded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiReport {
    pub interval: [f64; 2],
    pub accepted: Vec<f64>,
    pub point_estimate: f64,
    pub empirical_estimate: f64,
    pub observed_stat: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_bound: Option<f64>,
    pub contiguous: bool,
    pub per_null: Vec<TestReport>,
}

impl From<&ConfidenceResult> for CiReport {
    fn from(r: &ConfidenceResult) -> Self {
        Self {
            interval: [r.interval.0, r.interval.1],
            accepted: r.accepted.clone(),
            point_estimate: r.point_estimate,
            empirical_estimate: r.empirical_estimate,
            observed_stat: r.observed_stat,
            alpha: r.alpha,
            alpha_bound: r.alpha_bound,
            contiguous: r.contiguous,
            per_null: r.per_null.iter().map(TestReport::from).collect(),
        }
    }
}

/// Written next to every output so the run can be repeated exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a RunConfig,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str, seed: u64, config: &'a RunConfig) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}
