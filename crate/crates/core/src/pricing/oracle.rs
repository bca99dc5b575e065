use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, require_positive, Result};

use super::model::{OptionSpec, Payoff, PricingModel};
use super::price::norm_cdf;

const MIN_PATHS: usize = 1000;
const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// Two-stage Monte Carlo: β from the mixing density, then
/// `y_T = y + rs + √(s/(2(β₀+β)))·Z`, discounted by `e^(-rs - s/(4(β₀+β)))`.
///
/// Paths are split into chunks of 65536, chunk `i` drawing from stream `i`
/// of the seeded generator, so the result depends only on the seed.
pub fn mc_price_oracle(
    opt: &OptionSpec,
    model: &PricingModel,
    payoff: Payoff,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    opt.validate()?;
    model.validate()?;
    if n_paths < MIN_PATHS {
        return Err(domain(format!("need at least {MIN_PATHS} paths, got {n_paths}")));
    }
    let s = opt.tau();
    let beta0 = model.cutoff.beta0;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut done = 0;
    let mut chunk = 0u64;
    while done < n_paths {
        let len = CHUNK.min(n_paths - done);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let (mut cs, mut cs2) = (0.0, 0.0);
        for _ in 0..len {
            let beta = beta0 + model.mixing.sample(&mut rng);
            let z: f64 = rng.sample(StandardNormal);
            let y_t = opt.y + opt.rate * s + (s / (2.0 * beta)).sqrt() * z;
            let terminal = opt.s0 * y_t.exp();
            let value = match payoff {
                Payoff::Call => (terminal - opt.strike).max(0.0),
                Payoff::Put => (opt.strike - terminal).max(0.0),
            };
            let discounted = value * (-opt.rate * s - 0.25 * s / beta).exp();
            cs += discounted;
            cs2 += discounted * discounted;
        }
        sum += cs;
        sum_sq += cs2;
        done += len;
        chunk += 1;
    }
    let n = n_paths as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(McEstimate {
        price: mean,
        std_error: (var / n).sqrt(),
        n_paths,
    })
}

/// Standard Black–Scholes European call.
pub fn black_scholes_ref(s0: f64, strike: f64, rate: f64, sigma: f64, s: f64) -> Result<f64> {
    require_positive("s0", s0)?;
    require_positive("strike", strike)?;
    require_positive("sigma", sigma)?;
    require_positive("s", s)?;
    if !rate.is_finite() {
        return Err(domain("rate must be finite"));
    }
    let sd = sigma * s.sqrt();
    let d1 = ((s0 / strike).ln() + (rate + 0.5 * sigma * sigma) * s) / sd;
    let d2 = d1 - sd;
    Ok(s0 * norm_cdf(d1) - strike * (-rate * s).exp() * norm_cdf(d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{CutoffParams, MixingModel};
    use crate::pricing::KernelMode;

    #[test]
    fn black_scholes_examples() {
        let c = black_scholes_ref(100.0, 100.0, 0.05, 0.2, 1.0).unwrap();
        // Frozen from an independent implementation (scipy.stats.norm).
        assert!((c - 10.450_583_572_185_565).abs() < 1e-10, "{c}");
        let tiny = black_scholes_ref(100.0, 90.0, 0.05, 1e-9, 1.0).unwrap();
        assert!((tiny - (100.0 - 90.0 * (-0.05f64).exp())).abs() < 1e-9);
        let lo = black_scholes_ref(100.0, 100.0, 0.05, 0.1, 1.0).unwrap();
        assert!(lo < c);
        assert!(black_scholes_ref(100.0, 0.0, 0.05, 0.2, 1.0).is_err());
    }

    #[test]
    fn oracle_is_deterministic_and_scales() {
        let model = PricingModel::new(MixingModel::gamma(2.0, 1.0).unwrap(), CutoffParams::none(), KernelMode::ClosedForm)
            .unwrap();
        let opt = OptionSpec::new(100.0, 100.0, 0.05, 0.0, 1.0, 0.0).unwrap();
        let a = mc_price_oracle(&opt, &model, Payoff::Call, 20_000, 3).unwrap();
        let b = mc_price_oracle(&opt, &model, Payoff::Call, 20_000, 3).unwrap();
        assert_eq!(a, b);
        assert!(mc_price_oracle(&opt, &model, Payoff::Call, 999, 3).is_err());
    }

    #[test]
    fn zero_volatility_limit() {
        let model = PricingModel::new(
            MixingModel::gamma(1e6, 1e6 / 1e14).unwrap(),
            CutoffParams::none(),
            KernelMode::NumericQuadrature,
        )
        .unwrap();
        let opt = OptionSpec::new(100.0, 90.0, 0.05, 0.0, 1.0, 0.0).unwrap();
        let mc = mc_price_oracle(&opt, &model, Payoff::Call, 10_000, 1).unwrap();
        let expected = (-0.05f64).exp() * (100.0 * 0.05f64.exp() - 90.0);
        assert!((mc.price - expected).abs() < 1e-5, "{mc:?} vs {expected}");
    }
}
