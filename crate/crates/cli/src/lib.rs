//! Command-line front end: corpus checks, indicator reports, rankings,
//! pairwise comparisons and synthetic corpora.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Cli, Command, REPORT_COLUMNS};
pub use error::{CliError, CliResult};
