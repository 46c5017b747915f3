//! Command-line front end for `ctq-core`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 analytic method requested for the general case, 4 analytic and numeric
//! optima disagree beyond `--cross-tol`.

pub mod args;
pub mod commands;
pub mod family;
pub mod input;
pub mod verify;

use std::fmt;

pub use commands::{execute, Outcome};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Unsupported(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Unsupported(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}
