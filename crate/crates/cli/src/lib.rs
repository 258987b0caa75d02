//! Command-line front end for `ermstab`: experiment configs, canned
//! reproductions and structured reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{exit, CliError};
pub use report::ReportDocument;
