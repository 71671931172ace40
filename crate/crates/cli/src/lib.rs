//! Library half of the `ghostspin` command-line tool: scenario configs,
//! subcommand implementations and data file writers.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, run_config, Command, Overrides, RunOutcome, RunReport};
