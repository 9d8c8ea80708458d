//! Command-line front end for the neolith solver and diagnostics.

pub mod commands;
pub mod config;
pub mod error;

pub use error::{CliError, CliResult};
