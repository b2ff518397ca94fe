//! Command-line surface: configuration, the five commands and the verdict
//! reporter.

pub mod cli;
pub mod commands;
pub mod config;

pub use config::RunConfig;
