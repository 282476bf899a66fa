//! Command-line front end: run configuration, forward tables and inversion
//! campaigns with machine-readable reports.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_forward, cmd_invert, exit_code, synthesize, ForwardOutput, InversionOutput,
};
pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};
