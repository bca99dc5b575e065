//! `superstat`: fit superstatistical return models to price series,
//! tabulate densities, draw samples and price European options.

mod commands;
mod config;
mod exit;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{fit, pdf, price, sample, verify};
use config::GlobalArgs;

#[derive(Debug, Parser)]
#[command(name = "superstat", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit return models to a price or return series.
    Fit(fit::FitArgs),
    /// Draw samples from a return model.
    Sample(sample::SampleArgs),
    /// Tabulate the density of a return model.
    Pdf(pdf::PdfArgs),
    /// Price a European option.
    Price(price::PriceArgs),
    /// Run the numerical self-checks.
    Verify(verify::VerifyArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT } else { 0 });
        }
    };
    let result = cli.global.resolve().and_then(|cfg| match &cli.command {
        Command::Fit(a) => fit::run(a, &cfg),
        Command::Sample(a) => sample::run(a, &cfg),
        Command::Pdf(a) => pdf::run(a, &cfg),
        Command::Price(a) => price::run(a, &cfg),
        Command::Verify(a) => verify::run(a, &cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
