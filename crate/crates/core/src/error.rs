use std::path::PathBuf;

use thiserror::Error;

/// A single rejected row of an input file.
#[derive(Debug, Clone, PartialEq)]
pub struct RowIssue {
    /// 1-based line number in the source file.
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for RowIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (error estimate {achieved:.3e}, target {target:.3e})"
    )]
    NonConvergence {
        subdivisions: usize,
        achieved: f64,
        target: f64,
    },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("unstable scheme: {0}")]
    Stability(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("all {restarts} optimizer restarts failed")]
    AllRestartsFailed { restarts: usize },

    #[error("fits were computed on different samples (n_obs {expected} vs {found})")]
    MismatchedObservations { expected: usize, found: usize },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {}", join_issues(.0))]
    Validation(Vec<RowIssue>),
}

fn join_issues(issues: &[RowIssue]) -> String {
    const SHOWN: usize = 10;
    let mut out = issues
        .iter()
        .take(SHOWN)
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ");
    if issues.len() > SHOWN {
        out.push_str(&format!("; ... and {} more", issues.len() - SHOWN));
    }
    out
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Returns a domain error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and >= 0, got {value}")))
    }
}
