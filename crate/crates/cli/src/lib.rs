//! Command-line front end for the `lmax-core` solvers: instance generation,
//! solver commands, experiments, benchmarks and manifest replay.

pub mod bench;
pub mod commands;
pub mod error;
pub mod gen;
pub mod manifest;

pub use commands::{run, Cli, Command};
pub use error::{CliError, Result};
