use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use superstat_core::dist::{CutoffParams, MixingModel};
use superstat_core::pricing::{
    hedge_ratio, mc_price_oracle, price_beta_superposition, price_european_detailed, KernelMode, McEstimate,
    OptionSpec, Payoff, PricingModel,
};

use crate::config::RunConfig;
use crate::exit::{input_error, with_code, Classify, CliResult, ORACLE_DISAGREEMENT};
use crate::output::{emit, json_bytes, OutArgs, VERSION};

/// Agreement with the Monte Carlo oracle is required within this many
/// standard errors.
const MAX_STANDARD_ERRORS: f64 = 4.0;

/// Contents of the `--spec` file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSpec {
    pub option: OptionSpec,
    pub model: PricingModel,
    #[serde(default = "default_payoff")]
    pub payoff: Payoff,
}

fn default_payoff() -> Payoff {
    Payoff::Call
}

impl Default for PriceSpec {
    /// At-the-money one-year call under gamma mixing with a cut-off that
    /// caps the volatility at 20%.
    fn default() -> Self {
        let mixing = MixingModel::gamma(4.0, 0.2).expect("valid mixing");
        let cutoff = CutoffParams::new(12.5).expect("valid cut-off");
        Self {
            option: OptionSpec::new(100.0, 100.0, 0.05, 0.0, 1.0, 0.0).expect("valid option"),
            model: PricingModel::new(mixing, cutoff, KernelMode::NumericQuadrature).expect("valid model"),
            payoff: Payoff::Call,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PriceArgs {
    /// JSON file with `option`, `model` and optional `payoff`; a built-in
    /// example is used when omitted.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Also price by Monte Carlo and report the agreement.
    #[arg(long)]
    pub verify: bool,
    /// Monte Carlo paths for `--verify`.
    #[arg(long)]
    pub mc_paths: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    asset_weight: f64,
    strike_weight: f64,
    beta_route_price: f64,
    route_relative_difference: f64,
}

#[derive(Debug, Serialize)]
struct Verification {
    mc: McEstimate,
    standard_errors: f64,
    threshold: f64,
    agrees: bool,
}

#[derive(Debug, Serialize)]
struct PriceReport<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: &'a PriceArgs,
    config: &'a RunConfig,
    spec: PriceSpec,
    price: f64,
    hedge_ratio: f64,
    kernel_mode: KernelMode,
    diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Verification>,
}

fn load_spec(args: &PriceArgs, cfg: &RunConfig) -> CliResult<PriceSpec> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .map_err(input_error)?;
            serde_json::from_str(&text)
                .with_context(|| format!("invalid price spec {}", path.display()))
                .map_err(input_error)?
        }
        None => PriceSpec::default(),
    };
    // Tolerances always come from the resolved configuration.
    spec.model.quadrature = cfg.quadrature;
    spec.option.validate().classify("invalid option")?;
    spec.model.validate().classify("invalid pricing model")?;
    Ok(spec)
}

pub fn run(args: &PriceArgs, cfg: &RunConfig) -> CliResult<()> {
    let mut cfg = cfg.clone();
    cfg.mc_paths = args.mc_paths.unwrap_or(cfg.mc_paths);
    let spec = load_spec(args, &cfg)?;
    let (opt, model) = (&spec.option, &spec.model);

    let detail = price_european_detailed(opt, model, spec.payoff).classify("pricing failed")?;
    let beta_route = price_beta_superposition(opt, model, spec.payoff).classify("β-route pricing failed")?;
    let call_hedge = hedge_ratio(opt, model).classify("hedge ratio failed")?;
    // Parity: the call and put hedge ratios differ by exactly one unit.
    let hedge = match spec.payoff {
        Payoff::Call => call_hedge,
        Payoff::Put => call_hedge - 1.0,
    };

    let verification = if args.verify {
        let mc = mc_price_oracle(opt, model, spec.payoff, cfg.mc_paths, cfg.seed).classify("Monte Carlo failed")?;
        let z = (detail.price - mc.price).abs() / mc.std_error;
        Some(Verification { mc, standard_errors: z, threshold: MAX_STANDARD_ERRORS, agrees: z <= MAX_STANDARD_ERRORS })
    } else {
        None
    };

    let report = PriceReport {
        tool: "superstat",
        version: VERSION,
        command: "price",
        args,
        config: &cfg,
        spec,
        price: detail.price,
        hedge_ratio: hedge,
        kernel_mode: model.kernel_mode,
        diagnostics: Diagnostics {
            asset_weight: detail.asset_weight,
            strike_weight: detail.strike_weight,
            beta_route_price: beta_route,
            route_relative_difference: relative_difference(detail.price, beta_route),
        },
        verification,
    };
    emit(args.out.out.as_deref(), &json_bytes(&report))?;
    match &report.verification {
        Some(v) if !v.agrees => Err(with_code(
            ORACLE_DISAGREEMENT,
            anyhow::anyhow!("price differs from Monte Carlo by {:.2} standard errors", v.standard_errors),
        )),
        _ => Ok(()),
    }
}

fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 { 0.0 } else { (a - b).abs() / scale }
}
