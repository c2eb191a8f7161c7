//! Command-line front end for `cvsep-core`: scenario files, result records,
//! CSV and JSON output, and reproduction of the reference tables.

pub mod cli;
pub mod commands;
pub mod ensemble_run;
pub mod error;
pub mod output;
pub mod reproduce;
pub mod scenario;
pub mod tables;

pub use error::{CliError, CliResult};
