use clap::Args;
use crate::config::RunConfig;
use crate::exit::{Classify, CliResult};
use crate::output::{emit, num, ModelArgs, OutArgs};

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of draws.
    #[arg(long, short)]
    pub n: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Writes draws of the model, one per line under the header `x`.
pub fn run(args: &SampleArgs, cfg: &RunConfig) -> CliResult<()> {
    let dist = args.model.build(&cfg.quadrature)?;
    log::info!("sampling {} draws from {:?} with seed {}", args.n, dist.spec(), cfg.seed);
    let draws = if args.n == 0 { Vec::new() } else { dist.sample(args.n, cfg.seed).classify("sampling failed")? };
    let mut body = String::with_capacity(24 * (draws.len() + 1));
    body.push_str("x\n");
    for x in draws {
        body.push_str(&num(x));
        body.push('\n');
    }
    emit(args.out.out.as_deref(), body.as_bytes())
}

