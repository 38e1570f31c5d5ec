//! Command-line harness for the sharded verifier simulator: training runs,
//! scenario sweeps, latency spot checks and proof-of-semantic demos.

pub mod config;
pub mod demo;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod sweep;
pub mod train;

pub use config::RunConfig;
pub use error::{CliError, Result};
