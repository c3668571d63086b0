//! Batch driver for IFBM experiments. Every subcommand of the `ifbm` binary
//! is a function here so it can be scripted and tested directly.

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

pub use commands::{cmd_burgers, cmd_gen, cmd_mc, cmd_theta, RunMeta};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use verify::{cmd_verify, Suite, VerifyOptions};
