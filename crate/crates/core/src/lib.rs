//! Simulation-with-optimism inference for adaptively collected bandit data.
//!
//! The crate covers the whole compute path:
//!
//! * [`trajectory`]: the observed history `(A_t, X_t)` and per-arm statistics.
//! * [`rng`]: seeded, stream-addressable random sources.
//! * [`designs`]: the bandit sampling schemes that generated (or regenerate) data.
//! * [`simulator`]: trajectory resimulation under a point null, and runs against
//!   known arm models.
//! * [`inference`]: optimistic nuisance estimation, point-null tests, test-inversion
//!   confidence intervals and a Wald baseline.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. With `std`, replicate loops run on the ambient rayon pool; results are
//! identical for any worker count because every replicate owns its own random
//! stream and writes to a fixed slot.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod designs;
pub mod error;
pub mod inference;
mod math;
pub mod rng;
pub mod simulator;
pub mod trajectory;

pub use designs::{
    design_catalog, CatalogEntry, DesignKind, DesignPlan, DesignSpec, DesignState, Exploration,
};
pub use error::{Error, Result};
pub use inference::{
    ci_unbounded, confidence_interval, ecdf_at, estimate_nuisances, linspace, normal_cdf,
    normal_quantile, rejects, test_point_null, validate_bias_rate, wald_baseline, BiasKind,
    BiasRateReport, BoundProvider, CiOptions, ConfidenceResult, KnownSupport, NuisanceVector,
    SeedMode, TestOutcome,
};
pub use rng::{derive_seed, rng_stream, RngStream, SeedSpec};
pub use simulator::{
    batch_simulate, run_true_experiment, simulate_null_trajectory, ArmModel, BatchOutput, NullSpec,
    Target,
};
pub use trajectory::{compute_arm_stats, ArmStats, Record, Trajectory};
