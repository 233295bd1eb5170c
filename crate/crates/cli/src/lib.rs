//! Configuration, orchestration and file output for the `dhl` binary.

pub mod commands;
pub mod config;
pub mod snapshot;

pub use commands::{cmd_convergence, cmd_run, cmd_verify, Failure};
pub use config::{RunConfig, VerifyConfig};
