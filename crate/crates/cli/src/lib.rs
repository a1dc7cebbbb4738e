//! The `metaudit` command-line tool.
//!
//! Each subcommand is a plain function taking its parsed arguments so it can
//! be driven from tests without spawning a process. Exit codes: 0 success,
//! 2 input or parse error, 3 numeric overflow, 4 nothing left after
//! filtering.

pub mod cli;
pub mod commands;
pub mod input;
pub mod markdown;
pub mod output;
pub mod style;
pub mod svg;

use std::path::PathBuf;

use metaudit_core::audit::AuditError;
use metaudit_core::search_space::SpaceError;
use metaudit_core::sim::SimError;
use thiserror::Error;

pub use cli::{run, run_from, Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", describe_parse(path, *line, column.as_deref(), message))]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        column: Option<String>,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },
    #[error("overflow: {0}")]
    Overflow(SpaceError),
    #[error("{0}")]
    Space(SpaceError),
    #[error("nothing to analyse: {0}")]
    Empty(String),
    #[error("{0}")]
    Audit(AuditError),
    #[error("{0}")]
    Sim(SimError),
}

fn describe_parse(path: &std::path::Path, line: Option<u64>, column: Option<&str>, message: &str) -> String {
    let mut out = path.display().to_string();
    if let Some(line) = line {
        out.push_str(&format!(": line {line}"));
    }
    if let Some(column) = column {
        out.push_str(&format!(", column `{column}`"));
    }
    out.push_str(": ");
    out.push_str(message);
    out
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Overflow(_) => EXIT_OVERFLOW,
            CliError::Empty(_) => EXIT_EMPTY,
            CliError::Audit(AuditError::AllNotSignificant { .. } | AuditError::Empty) => EXIT_EMPTY,
            _ => EXIT_INPUT,
        }
    }
}

impl From<SpaceError> for CliError {
    fn from(e: SpaceError) -> Self {
        if e.is_overflow() {
            CliError::Overflow(e)
        } else {
            CliError::Space(e)
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        CliError::Audit(e)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidField { field, message } => CliError::Config {
                field: field.to_owned(),
                message,
            },
            SimError::AllCensored => CliError::Empty(e.to_string()),
            other => CliError::Sim(other),
        }
    }
}
