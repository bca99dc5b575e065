use std::fmt;

use superstat_core::Error;

pub const VERIFY_FAILURE: u8 = 1;
pub const INPUT: u8 = 2;
pub const NUMERICAL: u8 = 3;
pub const ORACLE_DISAGREEMENT: u8 = 4;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn input_error(error: impl Into<anyhow::Error>) -> CliError {
    CliError { code: INPUT, error: error.into() }
}

pub fn with_code(code: u8, error: impl Into<anyhow::Error>) -> CliError {
    CliError { code, error: error.into() }
}

/// Maps a library error onto the exit-code contract: bad input is 2,
/// numerical trouble is 3.
pub fn classify(error: Error) -> CliError {
    let code = match error {
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::Domain(_)
        | Error::Length(_)
        | Error::Degenerate(_)
        | Error::MismatchedObservations { .. } => INPUT,
        Error::Divergence(_)
        | Error::NonConvergence { .. }
        | Error::Overflow(_)
        | Error::Stability(_)
        | Error::AllRestartsFailed { .. } => NUMERICAL,
    };
    with_code(code, error)
}

/// Attaches context to library errors while keeping their exit code.
pub trait Classify<T> {
    fn classify(self, context: &str) -> CliResult<T>;
}

impl<T> Classify<T> for superstat_core::Result<T> {
    fn classify(self, context: &str) -> CliResult<T> {
        self.map_err(|e| {
            let mut err = classify(e);
            err.error = err.error.context(context.to_owned());
            err
        })
    }
}
