//! File formats and subcommands of the `rigpde` binary.

pub mod commands;
pub mod config;
pub mod files;
