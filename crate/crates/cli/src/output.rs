use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::Serialize;
use superstat_core::dist::{CutoffParams, MixingModel, ReturnDistribution};
use superstat_core::specfun::QuadratureSpec;

use crate::exit::{input_error, Classify, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes the whole output at once, to a file or to stdout.
pub fn emit(path: Option<&Path>, body: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, body)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(input_error),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body).and_then(|_| out.flush()).context("cannot write to stdout").map_err(input_error)
        }
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut body = serde_json::to_vec_pretty(value).expect("reports serialize");
    body.push(b'\n');
    body
}

/// Shortest representation that parses back to the same float.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    SuperstatGamma,
    CutoffSuperstatGamma,
    NumericInverseGamma,
}

/// A fully specified return distribution on the command line.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Shape of the mixing density.
    #[arg(long)]
    pub a: Option<f64>,
    /// Rate (gamma) or scale (inverse gamma) of the mixing density.
    #[arg(long)]
    pub b: Option<f64>,
    /// Constant inverse temperature β₀.
    #[arg(long)]
    pub beta0: Option<f64>,
}

impl ModelArgs {
    pub fn build(&self, q: &QuadratureSpec) -> CliResult<ReturnDistribution> {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| input_error(anyhow::anyhow!("--{name} is required for family {:?}", self.family)))
        };
        let ctx = "invalid model parameters";
        match self.family {
            Family::Gaussian => ReturnDistribution::gaussian(need("beta0", self.beta0)?).classify(ctx),
            Family::SuperstatGamma => {
                ReturnDistribution::superstat_gamma(need("a", self.a)?, need("b", self.b)?).classify(ctx)
            }
            Family::CutoffSuperstatGamma => {
                ReturnDistribution::cutoff_gamma(need("a", self.a)?, need("b", self.b)?, need("beta0", self.beta0)?, q)
                    .classify(ctx)
            }
            Family::NumericInverseGamma => {
                let mixing = MixingModel::inverse_gamma(need("a", self.a)?, need("b", self.b)?).classify(ctx)?;
                let cutoff = CutoffParams::new(self.beta0.unwrap_or(0.0)).classify(ctx)?;
                ReturnDistribution::numeric(mixing, cutoff, q).classify(ctx)
            }
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
