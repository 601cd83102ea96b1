use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("arm {arm} outside 1..={arms}")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("design horizon exceeded: t={t} > T={horizon}")]
    HorizonExceeded { t: usize, horizon: usize },

    #[error("insufficient data: arm {arm} has {pulls} pulls, need at least {needed}")]
    InsufficientData { arm: usize, pulls: u64, needed: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "{excluded} of {total} simulated replicates never pulled the target arm \
         (limit is 1%); the design or horizon is too small for this test"
    )]
    ExcessiveExclusions { excluded: usize, total: usize },
}
