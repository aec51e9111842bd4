//! Command implementations behind the `levrep` binary.
//!
//! Each run writes machine-readable CSVs plus a manifest that echoes the
//! full configuration (re-runnable via `--config manifest.txt`) and lists
//! every output file with its SHA-256 checksum. Progress goes to standard
//! error; data only to files.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod manifest;
pub mod runner;

pub const TOOL_NAME: &str = "levrep";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
