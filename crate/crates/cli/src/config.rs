use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use superstat_core::specfun::QuadratureSpec;

use crate::exit::{input_error, CliResult};

/// Settings shared by all subcommands. Values come from the defaults, then
/// the `--config` file, then flags and environment variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub quadrature: QuadratureSpec,
    pub seed: u64,
    pub restarts: usize,
    pub n_bins: usize,
    pub interval_seconds: i64,
    pub lag: usize,
    pub mc_paths: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            seed: 0,
            restarts: 4,
            n_bins: 100,
            interval_seconds: 60,
            lag: 1,
            mc_paths: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON file overriding the built-in defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, env = "SUPERSTAT_ABS_TOL")]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, env = "SUPERSTAT_REL_TOL")]
    pub rel_tol: Option<f64>,
    /// Bisection budget of the adaptive quadrature.
    #[arg(long, global = true, env = "SUPERSTAT_MAX_SUBDIVISIONS")]
    pub max_subdivisions: Option<usize>,
    /// Random seed; every run with the same seed is reproducible.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl GlobalArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.abs_tol {
            cfg.quadrature.abs_tol = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.quadrature.rel_tol = v;
        }
        if let Some(v) = self.max_subdivisions {
            cfg.quadrature.max_subdivisions = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.quadrature.validate().map_err(input_error)?;
        Ok(cfg)
    }
}

fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))
        .map_err(input_error)?;
    serde_json::from_str(&text)
        .with_context(|| format!("invalid config {}", path.display()))
        .map_err(input_error)
}
