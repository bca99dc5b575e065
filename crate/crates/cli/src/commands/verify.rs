use clap::{Args, ValueEnum};
use serde::Serialize;
use superstat_core::dist::{
    beta_function_bound, marginal_pdf_gamma, schwarz_bound, variance_cutoff, CutoffParams, MixingModel,
    ReturnDistribution,
};
use superstat_core::pricing::{
    kernel_gamma_closed, kernel_invgamma_closed, kernel_numeric, mc_price_oracle, price_beta_superposition,
    price_european, KernelMode, OptionSpec, Payoff, PricingModel,
};
use superstat_core::specfun::{generalized_gamma, integrate_exp_semi_infinite, QuadratureSpec};
use superstat_core::Result;

use crate::config::RunConfig;
use crate::exit::{with_code, CliResult, VERIFY_FAILURE};
use crate::output::{emit, json_bytes, OutArgs, VERSION};

const FIG1: (f64, f64, f64) = (0.904, 0.571, 0.0252);
const VARIANCE_DRAWS: usize = 1_000_000;
const PARITY_PATHS: usize = 1_000_000;
const MC_STANDARD_ERRORS: f64 = 4.0;
/// Relative error injected into the closed-form kernels by
/// `--perturb-kernel`.
const KERNEL_PERTURBATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Kernel,
    Normalization,
    Variance,
    Bounds,
    Pricing,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Test fixture: scale the closed-form kernels by 1 + 10⁻³.
    #[arg(long, hide = true)]
    pub perturb_kernel: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

#[derive(Debug, Serialize)]
pub struct Check {
    name: &'static str,
    passed: bool,
    measured: f64,
    tolerance: f64,
    detail: String,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self { name, passed: measured <= tolerance, measured, tolerance, detail }
    }

    fn failed(name: &'static str, error: superstat_core::Error) -> Self {
        Self { name, passed: false, measured: f64::NAN, tolerance: f64::NAN, detail: error.to_string() }
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: &'a VerifyArgs,
    config: &'a RunConfig,
    passed: bool,
    checks: Vec<Check>,
}

type CheckFn = fn(&RunConfig, &VerifyArgs) -> Result<Check>;

fn checks(suite: Suite) -> Vec<(&'static str, CheckFn)> {
    let all: [(Suite, &'static str, CheckFn); 8] = [
        (Suite::Kernel, "kernel_gamma_closed_form", kernel_gamma),
        (Suite::Kernel, "kernel_inverse_gamma_closed_form", kernel_invgamma),
        (Suite::Normalization, "normalization_grid", normalization),
        (Suite::Normalization, "cutoff_limit", cutoff_limit),
        (Suite::Variance, "variance_quadrature", variance_quadrature),
        (Suite::Variance, "variance_monte_carlo", variance_mc),
        (Suite::Bounds, "generalized_gamma_bounds", bounds),
        (Suite::Pricing, "pricing_routes", pricing_routes),
    ];
    let mut out: Vec<(&'static str, CheckFn)> =
        all.iter().filter(|(s, ..)| suite == Suite::All || *s == suite).map(|&(_, n, f)| (n, f)).collect();
    if matches!(suite, Suite::All | Suite::Pricing) {
        out.push(("put_call_parity_monte_carlo", parity_mc));
    }
    out
}

pub fn run(args: &VerifyArgs, cfg: &RunConfig) -> CliResult<()> {
    let results: Vec<Check> = checks(args.suite)
        .into_iter()
        .map(|(name, f)| {
            log::info!("running {name}");
            f(cfg, args).unwrap_or_else(|e| Check::failed(name, e))
        })
        .collect();
    let passed = results.iter().all(|c| c.passed);
    let report = VerifyReport {
        tool: "superstat",
        version: VERSION,
        command: "verify",
        args,
        config: cfg,
        passed,
        checks: results,
    };
    emit(args.out.out.as_deref(), &json_bytes(&report))?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(with_code(VERIFY_FAILURE, anyhow::anyhow!("failed checks: {}", failed.join(", "))))
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn kernel_grid<C, M>(cfg: &RunConfig, args: &VerifyArgs, params: &[(f64, f64)], closed: C, mixing: M) -> Result<(f64, String)>
where
    C: Fn(f64, f64, f64, f64, f64) -> Result<f64>,
    M: Fn(f64, f64) -> Result<MixingModel>,
{
    let scale = if args.perturb_kernel { 1.0 + KERNEL_PERTURBATION } else { 1.0 };
    let rate = 0.05;
    let mut worst = (0.0, String::new());
    for &(a, b) in params {
        let model = PricingModel::new(mixing(a, b)?, CutoffParams::none(), KernelMode::NumericQuadrature)?
            .with_quadrature(cfg.quadrature);
        for s in [0.1, 1.0, 4.0] {
            // Offsets from the kernel centre y = -rs.
            for dy in [-2.0, -0.5, -1e-3, 1e-3, 0.2, 1.5] {
                let y = dy - rate * s;
                let c = scale * closed(y, s, a, b, rate)?;
                let q = kernel_numeric(y, s, rate, &model)?;
                let e = rel(c, q);
                if e > worst.0 {
                    worst = (e, format!("a={a} b={b} s={s} y={y}"));
                }
            }
        }
    }
    Ok(worst)
}

fn kernel_gamma(cfg: &RunConfig, args: &VerifyArgs) -> Result<Check> {
    let params = [(0.904, 0.571), (2.0, 1.0), (5.0, 0.3)];
    let (e, at) = kernel_grid(cfg, args, &params, kernel_gamma_closed, MixingModel::gamma)?;
    Ok(Check::at_most("kernel_gamma_closed_form", e, 1e-6, format!("worst at {at}")))
}

fn kernel_invgamma(cfg: &RunConfig, args: &VerifyArgs) -> Result<Check> {
    let params = [(1.5, 1.0), (3.0, 0.5), (0.8, 2.0)];
    let (e, at) = kernel_grid(cfg, args, &params, kernel_invgamma_closed, MixingModel::inverse_gamma)?;
    Ok(Check::at_most("kernel_inverse_gamma_closed_form", e, 1e-6, format!("worst at {at}")))
}

/// `∫ g(x) p(x) dx` over the line for even `g` given in log form.
fn even_moment(dist: &ReturnDistribution, ln_g: impl Fn(f64) -> f64, q: &QuadratureSpec) -> Result<f64> {
    let est = integrate_exp_semi_infinite(|x| ln_g(x) + dist.ln_pdf(x).unwrap_or(f64::NEG_INFINITY), 1.0, q)?;
    Ok(2.0 * est.ln_value.exp())
}

fn normalization(cfg: &RunConfig, _: &VerifyArgs) -> Result<Check> {
    let q = &cfg.quadrature;
    let mut dists = Vec::new();
    for (a, b) in [(0.6, 0.3), (0.904, 0.571), (3.0, 4.0)] {
        dists.push(ReturnDistribution::superstat_gamma(a, b)?);
        for beta0 in [1e-3, 0.0252, 1.0] {
            dists.push(ReturnDistribution::cutoff_gamma(a, b, beta0, q)?);
            dists.push(ReturnDistribution::numeric(MixingModel::inverse_gamma(a, b)?, CutoffParams::new(beta0)?, q)?);
        }
    }
    let mut worst = (0.0, String::new());
    for d in &dists {
        let e = (even_moment(d, |_| 0.0, q)? - 1.0).abs();
        if e > worst.0 {
            worst = (e, format!("{:?}", d.spec()));
        }
    }
    Ok(Check::at_most("normalization_grid", worst.0, 1e-7, format!("{} densities; worst {}", dists.len(), worst.1)))
}

fn cutoff_limit(cfg: &RunConfig, _: &VerifyArgs) -> Result<Check> {
    let mut worst = 0.0f64;
    for (a, b) in [(1.0, 1.0), FIG1_AB] {
        let d = ReturnDistribution::cutoff_gamma(a, b, 1e-12, &cfg.quadrature)?;
        for i in 0..=200 {
            let x = -10.0 + 0.1 * i as f64;
            worst = worst.max((d.pdf(x)? - marginal_pdf_gamma(x, a, b)?).abs());
        }
    }
    Ok(Check::at_most("cutoff_limit", worst, 1e-6, "sup distance at beta0 = 1e-12 on [-10, 10]".into()))
}

const FIG1_AB: (f64, f64) = (FIG1.0, FIG1.1);

fn variance_quadrature(cfg: &RunConfig, _: &VerifyArgs) -> Result<Check> {
    let (a, b, beta0) = FIG1;
    let q = &cfg.quadrature;
    let formula = variance_cutoff(a, b, beta0, q)?;
    let d = ReturnDistribution::cutoff_gamma(a, b, beta0, q)?;
    let direct = even_moment(&d, |x| 2.0 * x.ln(), q)?;
    Ok(Check::at_most(
        "variance_quadrature",
        rel(formula, direct),
        1e-6,
        format!("formula {formula}, quadrature {direct}"),
    ))
}

fn variance_mc(cfg: &RunConfig, _: &VerifyArgs) -> Result<Check> {
    let (a, b, beta0) = FIG1;
    let formula = variance_cutoff(a, b, beta0, &cfg.quadrature)?;
    let d = ReturnDistribution::cutoff_gamma(a, b, beta0, &cfg.quadrature)?;
    let x = d.sample(VARIANCE_DRAWS, cfg.seed)?;
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| v * v).sum::<f64>() / n;
    let m4 = x.iter().map(|v| v.powi(4)).sum::<f64>() / n;
    let se = ((m4 - m2 * m2) / n).sqrt();
    Ok(Check::at_most(
        "variance_monte_carlo",
        (m2 - formula).abs() / se,
        MC_STANDARD_ERRORS,
        format!("formula {formula}, sample {m2} ± {se} ({VARIANCE_DRAWS} draws), measured in standard errors"),
    ))
}

fn bounds(cfg: &RunConfig, _: &VerifyArgs) -> Result<Check> {
    let q = &cfg.quadrature;
    let mut violations = 0;
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in 0..10 {
        for j in 0..10 {
            let v = 10f64.powf(-3.0 + 5.0 * j as f64 / 9.0);
            let a_small = 0.05 + 0.9 * i as f64 / 9.0;
            let a_large = 1.05 + 4.0 * i as f64 / 9.0;
            for (a, bound) in [(a_small, beta_function_bound(a_small, v)?), (a_large, schwarz_bound(a_large, v)?)] {
                let g = generalized_gamma(a, 1.0, v, q)?;
                count += 1;
                worst = worst.max(g / bound);
                if g > bound {
                    violations += 1;
                }
            }
        }
    }
    Ok(Check::at_most(
        "generalized_gamma_bounds",
        violations as f64,
        0.0,
        format!("{count} points, largest value/bound ratio {worst:.6}"),
    ))
}

fn pricing_routes(cfg: &RunConfig, _: &VerifyArgs) -> Result<Check> {
    let opt = OptionSpec::new(100.0, 100.0, 0.05, 0.0, 1.0, 0.0)?;
    let (a, b, beta0) = FIG1;
    let models = [
        PricingModel::new(MixingModel::gamma(2.0, 1.0)?, CutoffParams::none(), KernelMode::ClosedForm)?,
        PricingModel::new(MixingModel::gamma(a, b)?, CutoffParams::new(beta0)?, KernelMode::NumericQuadrature)?,
        PricingModel::new(MixingModel::inverse_gamma(3.0, 0.5)?, CutoffParams::none(), KernelMode::ClosedForm)?,
    ];
    let mut worst = 0.0f64;
    for model in models {
        let model = model.with_quadrature(cfg.quadrature);
        for strike in [50.0, 100.0, 150.0] {
            let o = OptionSpec { strike, ..opt };
            for payoff in [Payoff::Call, Payoff::Put] {
                worst = worst.max(rel(price_european(&o, &model, payoff)?, price_beta_superposition(&o, &model, payoff)?));
            }
        }
    }
    Ok(Check::at_most("pricing_routes", worst, 1e-6, "kernel route against β superposition".into()))
}

/// `C - P = S₀eʸ - K e^(-rs) E[e^(-s/(4(β₀+β)))]` checked on Monte Carlo
/// prices that share their paths.
fn parity_mc(cfg: &RunConfig, _: &VerifyArgs) -> Result<Check> {
    let opt = OptionSpec::new(100.0, 100.0, 0.05, 0.0, 1.0, 0.0)?;
    let model = PricingModel::new(MixingModel::gamma(4.0, 0.2)?, CutoffParams::new(12.5)?, KernelMode::NumericQuadrature)?
        .with_quadrature(cfg.quadrature);
    let call = mc_price_oracle(&opt, &model, Payoff::Call, PARITY_PATHS, cfg.seed)?;
    let put = mc_price_oracle(&opt, &model, Payoff::Put, PARITY_PATHS, cfg.seed)?;
    let d = superstat_core::pricing::discount_expectation(opt.tau(), &model)?;
    let predicted = opt.spot() - opt.strike * (-opt.rate * opt.tau()).exp() * d;
    // Same paths, so the errors of C and P are strongly correlated; the
    // bound below is conservative.
    let se = call.std_error + put.std_error;
    Ok(Check::at_most(
        "put_call_parity_monte_carlo",
        ((call.price - put.price) - predicted).abs() / se,
        MC_STANDARD_ERRORS,
        format!("C-P = {}, predicted {predicted}, measured in standard errors", call.price - put.price),
    ))
}
