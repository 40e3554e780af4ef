//! Configuration-driven front end for the dskg solvers and verification
//! suites.

// `!(x > 0.0)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{validate, ConfigError, Diagnostic, RunConfig, Severity, Subcommand};
pub use run::{run, CliError, Outcome, RunOptions, Status};
