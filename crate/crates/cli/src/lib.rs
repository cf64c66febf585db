//! File formats and subcommands of the `ppt-bell` tool.

pub mod commands;
pub mod formats;
