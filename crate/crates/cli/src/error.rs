use std::fmt::Display;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    /// Success: every claim PASS, verdict CONSISTENT, no bound violation.
    pub const OK: i32 = 0;
    /// Internal error, I/O failure or unparsable report.
    pub const ERROR: i32 = 1;
    /// Invalid configuration, unknown example or bad command line.
    pub const USAGE: i32 = 2;
    /// INCONSISTENT verdict, failed claim or violated bound.
    pub const INCONSISTENT: i32 = 3;
    /// NO_CONVERGENT_SELECTION verdict.
    pub const NO_CONVERGENT_SELECTION: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("unknown example `{0}` (known: prop-3-1, prop-3-2, thm-5-1-demo, prop-6-2, cor-4-2)")]
    UnknownExample(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse report {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] ermstab::Error),
}

impl CliError {
    pub fn field(field: impl Into<String>, message: impl Display) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Syntax { .. } | CliError::Config { .. } | CliError::UnknownExample(_) => exit::USAGE,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Core(_) => exit::ERROR,
        }
    }
}
