//! Front end for `hlm-core`: argument parsing, config files, JSON/CSV
//! reports and the acceptance suite behind the `hlm` binary.

pub mod acceptance;
pub mod args;
pub mod commands;
pub mod config;
pub mod report;

pub use commands::{run, EXIT_ACCEPTANCE, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
