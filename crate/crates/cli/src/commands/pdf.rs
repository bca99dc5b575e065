use clap::Args;

use crate::config::RunConfig;
use crate::exit::{input_error, Classify, CliResult};
use crate::output::{emit, num, ModelArgs, OutArgs};

#[derive(Debug, Clone, Args)]
pub struct PdfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// First grid point.
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: f64,
    /// Last grid point.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: f64,
    /// Grid size, at least 2.
    #[arg(long, default_value_t = 401)]
    pub n_points: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Tabulates the density on an equally spaced grid including both ends.
pub fn run(args: &PdfArgs, cfg: &RunConfig) -> CliResult<()> {
    if !(args.x_min.is_finite() && args.x_max.is_finite() && args.x_min < args.x_max) {
        return Err(input_error(anyhow::anyhow!("need finite x_min < x_max, got [{}, {}]", args.x_min, args.x_max)));
    }
    if args.n_points < 2 {
        return Err(input_error(anyhow::anyhow!("n_points must be >= 2, got {}", args.n_points)));
    }
    let dist = args.model.build(&cfg.quadrature)?;
    let last = (args.n_points - 1) as f64;
    let mut body = String::from("x,pdf\n");
    for i in 0..args.n_points {
        let w = i as f64;
        let x = ((last - w) * args.x_min + w * args.x_max) / last;
        let p = dist.pdf(x).classify("density evaluation failed")?;
        body.push_str(&format!("{},{}\n", num(x), num(p)));
    }
    emit(args.out.out.as_deref(), body.as_bytes())
}
