//! Observed experiment histories and per-arm summary statistics.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One round of an experiment: the arm pulled at time `t` and its outcome.
///
/// Arms are 1-based throughout the public API.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: usize,
    pub arm: usize,
    pub outcome: f64,
}

/// A complete, time-ordered history `H_T` over `K` arms.
///
/// Record times are always exactly `1..=T`; construction rejects anything else.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    arms: usize,
    // (arm, outcome), time is the index + 1
    rounds: Vec<(usize, f64)>,
}

impl Trajectory {
    pub fn empty(arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidTrajectory("K must be at least 1".into()));
        }
        Ok(Self {
            arms,
            rounds: Vec::new(),
        })
    }

    /// Builds a trajectory from `(arm, outcome)` pairs in time order.
    pub fn from_pairs<I>(arms: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut h = Self::empty(arms)?;
        for (arm, outcome) in pairs {
            h.push(arm, outcome)?;
        }
        Ok(h)
    }

    /// Builds a trajectory from explicit records, checking that times run `1..=T`.
    pub fn from_records(arms: usize, records: &[Record]) -> Result<Self> {
        let mut h = Self::empty(arms)?;
        h.rounds.reserve(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.t != i + 1 {
                return Err(Error::InvalidTrajectory(format!(
                    "record {} has t={}, expected t={}",
                    i + 1,
                    r.t,
                    i + 1
                )));
            }
            h.push(r.arm, r.outcome)?;
        }
        Ok(h)
    }

    pub(crate) fn with_capacity(arms: usize, capacity: usize) -> Self {
        Self {
            arms,
            rounds: Vec::with_capacity(capacity),
        }
    }

    /// Appends the next round. Non-finite outcomes are rejected.
    pub fn push(&mut self, arm: usize, outcome: f64) -> Result<()> {
        if arm == 0 || arm > self.arms {
            return Err(Error::ArmOutOfRange {
                arm,
                arms: self.arms,
            });
        }
        if !outcome.is_finite() {
            return Err(Error::InvalidTrajectory(format!(
                "non-finite outcome at t={}",
                self.rounds.len() + 1
            )));
        }
        self.rounds.push((arm, outcome));
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, arm: usize, outcome: f64) {
        debug_assert!(arm >= 1 && arm <= self.arms);
        self.rounds.push((arm, outcome));
    }

    /// Number of arms `K`.
    pub fn arms(&self) -> usize {
        self.arms
    }

    /// Horizon `T`.
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn get(&self, t: usize) -> Option<Record> {
        let &(arm, outcome) = self.rounds.get(t.checked_sub(1)?)?;
        Some(Record { t, arm, outcome })
    }

    pub fn records(&self) -> impl ExactSizeIterator<Item = Record> + '_ {
        self.rounds
            .iter()
            .enumerate()
            .map(|(i, &(arm, outcome))| Record {
                t: i + 1,
                arm,
                outcome,
            })
    }

    /// The first `len` rounds as a new trajectory.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            arms: self.arms,
            rounds: self.rounds[..len.min(self.rounds.len())].to_vec(),
        }
    }

    /// Sequence of pulled arms, in time order.
    pub fn arm_sequence(&self) -> Vec<usize> {
        self.rounds.iter().map(|&(a, _)| a).collect()
    }
}

/// Pull counts, sample means and plug-in (divide-by-N) variances per arm.
///
/// `mean` and `varhat` are `None` for arms that were never pulled.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    pub pulls: Vec<u64>,
    pub mean: Vec<Option<f64>>,
    pub varhat: Vec<Option<f64>>,
}

impl ArmStats {
    pub fn arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls_of(&self, arm: usize) -> u64 {
        self.pulls[arm - 1]
    }

    pub fn mean_of(&self, arm: usize) -> Option<f64> {
        self.mean[arm - 1]
    }

    pub fn varhat_of(&self, arm: usize) -> Option<f64> {
        self.varhat[arm - 1]
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls.iter().sum()
    }
}

/// Single pass Welford accumulation of count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Welford {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn mean(&self) -> Option<f64> {
        (self.n > 0).then_some(self.mean)
    }

    pub fn varhat(&self) -> Option<f64> {
        // m2 can pick up a -0.0 or a tiny negative from rounding
        (self.n > 0).then(|| (self.m2 / self.n as f64).max(0.0))
    }
}

pub fn compute_arm_stats(h: &Trajectory) -> ArmStats {
    let mut acc = alloc::vec![Welford::default(); h.arms()];
    for &(arm, x) in &h.rounds {
        acc[arm - 1].push(x);
    }
    ArmStats {
        pulls: acc.iter().map(|w| w.n).collect(),
        mean: acc.iter().map(Welford::mean).collect(),
        varhat: acc.iter().map(Welford::varhat).collect(),
    }
}
