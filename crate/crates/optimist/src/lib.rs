//! File formats, experiment harness and command-line plumbing around
//! [`optimist_core`].

pub mod config;
pub mod error;
pub mod harness;
pub mod plan;
pub mod report;
pub mod trajectory_csv;

pub use error::{Error, Result};
