//! File formats, parallel execution, reports and the `qkd2e` command line
//! on top of [`qkd2e_core`].

pub mod cli;
pub mod jsonl;
pub mod manifest;
pub mod output;
pub mod runner;
pub mod scenario;
pub mod so4;
pub mod summary;
pub mod tables;
pub mod threshold;

/// Version string embedded in every report.
pub const TOOL_VERSION: &str = concat!("qkd2e ", env!("CARGO_PKG_VERSION"));
