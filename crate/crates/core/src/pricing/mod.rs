//! European option pricing under superstatistical log-return dynamics.

mod kernel;
mod model;
mod oracle;
mod price;

pub use kernel::{green_function, kernel_gamma_closed, kernel_invgamma_closed, kernel_numeric};
pub use model::{KernelMode, OptionSpec, Payoff, PricingModel};
pub use oracle::{black_scholes_ref, mc_price_oracle, McEstimate};
pub use price::{
    conditional_price, conditional_price_payoff, discount_expectation, hedge_ratio,
    price_beta_superposition, price_european, price_european_detailed, PriceBreakdown,
};
