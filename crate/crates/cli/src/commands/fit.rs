use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use superstat_core::data_io::{load_csv, resample_regular, CsvOptions};
use superstat_core::dist::ModelSpec;
use superstat_core::estimation::{
    empirical_pdf, fit_mle, log_returns, model_compare, standardize, FitOptions, FitResult, ModelFamily,
};
use superstat_core::Error;

use crate::config::RunConfig;
use crate::exit::{input_error, Classify, CliResult};
use crate::output::{emit, json_bytes, num, OutArgs, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FitFamily {
    Gaussian,
    SuperstatGamma,
    CutoffSuperstatGamma,
    NumericInverseGamma,
    /// Gaussian, gamma superposition and cut-off gamma superposition,
    /// ranked by AIC.
    All,
}

impl FitFamily {
    fn families(self) -> Vec<ModelFamily> {
        match self {
            FitFamily::Gaussian => vec![ModelFamily::Gaussian],
            FitFamily::SuperstatGamma => vec![ModelFamily::SuperstatGamma],
            FitFamily::CutoffSuperstatGamma => vec![ModelFamily::CutoffSuperstatGamma],
            FitFamily::NumericInverseGamma => vec![ModelFamily::NumericInverseGamma],
            FitFamily::All => vec![
                ModelFamily::Gaussian,
                ModelFamily::SuperstatGamma,
                ModelFamily::CutoffSuperstatGamma,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// `timestamp,price` series; resampled, differenced and standardized.
    Prices,
    /// A column `x` of returns, fitted as given.
    Returns,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Input CSV.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub family: FitFamily,
    #[arg(long, value_enum, default_value = "prices")]
    pub input_kind: InputKind,
    /// Optimizer starts per family.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Histogram bins for the overlay.
    #[arg(long)]
    pub n_bins: Option<usize>,
    /// Resampling interval in seconds.
    #[arg(long)]
    pub interval: Option<i64>,
    /// Return horizon in resampled steps.
    #[arg(long)]
    pub lag: Option<usize>,
    /// Skip resampling onto a regular grid.
    #[arg(long)]
    pub no_resample: bool,
    /// Histogram and model densities per bin centre.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub overlay: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutArgs,
}

impl FitArgs {
    fn apply(&self, cfg: &RunConfig) -> RunConfig {
        let mut cfg = cfg.clone();
        cfg.restarts = self.restarts.unwrap_or(cfg.restarts);
        cfg.n_bins = self.n_bins.unwrap_or(cfg.n_bins);
        cfg.interval_seconds = self.interval.unwrap_or(cfg.interval_seconds);
        cfg.lag = self.lag.unwrap_or(cfg.lag);
        cfg
    }
}

#[derive(Debug, Serialize)]
struct Preprocessing {
    n_prices: Option<usize>,
    n_returns: usize,
    mean: Option<f64>,
    std: Option<f64>,
    gaps: usize,
}

#[derive(Debug, Serialize)]
struct FitEntry {
    rank: usize,
    family: ModelFamily,
    params: ModelSpec,
    log_likelihood: f64,
    nll: f64,
    aic: f64,
    converged: bool,
    n_restarts_used: usize,
    evaluations: usize,
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: &'a FitArgs,
    config: &'a RunConfig,
    preprocessing: Preprocessing,
    fits: Vec<FitEntry>,
}

fn read_returns(path: &Path) -> CliResult<Vec<f64>> {
    let parse = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io { path: path.to_path_buf(), source },
            other => Error::Parse { line, message: format!("{other:?}") },
        }
    };
    let run = || -> superstat_core::Result<Vec<f64>> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(parse)?;
        let headers = reader.headers().map_err(parse)?.clone();
        let col = headers.iter().position(|h| h.eq_ignore_ascii_case("x")).unwrap_or(0);
        let mut out = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(parse)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let raw = rec.get(col).unwrap_or("");
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("bad return value '{raw}'") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("non-finite return {v}") });
            }
            out.push(v);
        }
        Ok(out)
    };
    run().classify("cannot load returns")
}

pub fn run(args: &FitArgs, cfg: &RunConfig) -> CliResult<()> {
    let cfg = args.apply(cfg);
    if cfg.interval_seconds <= 0 || cfg.lag == 0 || cfg.n_bins == 0 || cfg.restarts == 0 {
        return Err(input_error(anyhow::anyhow!(
            "interval, lag, n_bins and restarts must all be positive"
        )));
    }
    let (x, preprocessing) = match args.input_kind {
        InputKind::Prices => {
            let series = load_csv(&args.input, &CsvOptions::default()).classify("cannot load prices")?;
            let (prices, gaps) = if args.no_resample {
                (series.prices, 0)
            } else {
                let r = resample_regular(&series, cfg.interval_seconds).classify("cannot resample")?;
                (r.series.prices, r.gaps.len())
            };
            let returns = log_returns(&prices, cfg.lag).classify("cannot form returns")?;
            let z = standardize(&returns).classify("cannot standardize returns")?;
            let pre = Preprocessing {
                n_prices: Some(prices.len()),
                n_returns: z.values.len(),
                mean: Some(z.mean),
                std: Some(z.std),
                gaps,
            };
            (z.values, pre)
        }
        InputKind::Returns => {
            let x = read_returns(&args.input)?;
            let pre = Preprocessing { n_prices: None, n_returns: x.len(), mean: None, std: None, gaps: 0 };
            (x, pre)
        }
    };

    let opts = FitOptions { restarts: cfg.restarts, seed: cfg.seed, quadrature: cfg.quadrature, ..FitOptions::default() };
    let mut fits = Vec::new();
    for family in args.family.families() {
        log::info!("fitting {family} to {} observations", x.len());
        fits.push(fit_mle(&x, family, &opts).classify(&format!("{family} fit failed"))?);
    }
    let ranked = model_compare(&fits).classify("model comparison failed")?;

    if let Some(path) = &args.overlay {
        let body = overlay(&x, cfg.n_bins, &ranked)?;
        emit(Some(path), body.as_bytes())?;
    }
    let report = FitReport {
        tool: "superstat",
        version: VERSION,
        command: "fit",
        args,
        config: &cfg,
        preprocessing,
        fits: ranked.iter().enumerate().map(|(i, f)| entry(i + 1, f)).collect(),
    };
    emit(args.out.out.as_deref(), &json_bytes(&report))
}

fn entry(rank: usize, f: &FitResult) -> FitEntry {
    FitEntry {
        rank,
        family: f.family,
        params: f.model.spec(),
        log_likelihood: f.log_likelihood,
        nll: -f.log_likelihood,
        aic: f.aic,
        converged: f.converged,
        n_restarts_used: f.n_restarts_used,
        evaluations: f.evaluations,
    }
}

fn overlay(x: &[f64], n_bins: usize, fits: &[FitResult]) -> CliResult<String> {
    let hist = empirical_pdf(x, n_bins).classify("cannot build histogram")?;
    let mut body = String::from("bin_center,empirical_pdf,count");
    for f in fits {
        body.push_str(&format!(",{}_pdf", f.family));
    }
    body.push('\n');
    for (i, &c) in hist.bin_centers.iter().enumerate() {
        body.push_str(&format!("{},{},{}", num(c), num(hist.densities[i]), hist.counts[i]));
        for f in fits {
            let p = f.model.pdf(c).classify("model density failed")?;
            body.push(',');
            body.push_str(&num(p));
        }
        body.push('\n');
    }
    Ok(body)
}
