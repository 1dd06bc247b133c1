//! Command-line front end: `solve`, `verify`, `compare` and `sweep`.
//!
//! Exit codes: 0 success, 1 input error, 2 solver failure, 3 verification
//! failure.

mod args;
mod commands;
mod output;

use std::ffi::OsString;
use std::fmt;
use std::process::ExitCode;

use clap::Parser;

pub use args::{Cli, Command, CompareArgs, SingleArgs, SolverArgs, SweepArgs, ToleranceArgs, VerifyArgs};
use subsonic_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    InputError = 1,
    SolverFailure = 2,
    VerificationFailure = 3,
}

/// A failed command with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { status: Status::InputError, message: message.into() }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self { status: Status::VerificationFailure, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_)
            | Error::NotSubsonic { .. }
            | Error::InvalidProfile(_)
            | Error::Config(_)
            | Error::Precondition(_)
            | Error::Csv(_)
            | Error::Io(_) => Status::InputError,
            Error::FluxDegeneracy { .. }
            | Error::DegenerateState { .. }
            | Error::Convergence { .. }
            | Error::PostCheck(_)
            | Error::Inconsistent(_) => Status::SolverFailure,
            Error::IncomparableGrids | Error::InsufficientData { .. } => Status::VerificationFailure,
        };
        Self { status, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(format!("i/o error: {e}"))
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(Status::InputError as u8) } else { ExitCode::SUCCESS };
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.status as u8)
        }
    }
}
