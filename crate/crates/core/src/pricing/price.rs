use std::cell::RefCell;

use statrs::function::erf::erfc;

use crate::error::{domain, require_positive, Error, Result};
use crate::specfun::{integrate_exp_semi_infinite, integrate_finite, QuadratureSpec};

use super::kernel::ln_kernel;
use super::model::{OptionSpec, Payoff, PricingModel};

const FD_STEP: f64 = 1e-5;

/// Standard normal distribution function.
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Price conditional on the inverse temperature `beta`, in closed form.
///
/// With `v = s/(2β)` the terminal log-return is `N(y + rs, v)` and the
/// discount is `e^(-rs - v/2)`, giving
/// `C = S e^y Φ(d₁) - K e^(-rs - v/2) Φ(d₂)`.
pub fn conditional_price_payoff(opt: &OptionSpec, beta: f64, payoff: Payoff) -> Result<f64> {
    opt.validate()?;
    require_positive("beta", beta)?;
    let s = opt.tau();
    let v = s / (2.0 * beta);
    let spot = opt.spot();
    let strike_pv = opt.strike * (-opt.rate * s - 0.5 * v).exp();
    if opt.strike == 0.0 {
        return Ok(match payoff {
            Payoff::Call => spot,
            Payoff::Put => 0.0,
        });
    }
    let sd = v.sqrt();
    let d2 = (opt.y + (opt.s0 / opt.strike).ln() + opt.rate * s) / sd;
    let d1 = d2 + sd;
    let price = match payoff {
        Payoff::Call => spot * norm_cdf(d1) - strike_pv * norm_cdf(d2),
        Payoff::Put => strike_pv * norm_cdf(-d2) - spot * norm_cdf(-d1),
    };
    Ok(price.max(0.0))
}

/// European call conditional on `beta`.
pub fn conditional_price(opt: &OptionSpec, beta: f64) -> Result<f64> {
    conditional_price_payoff(opt, beta, Payoff::Call)
}

/// `D = E_f[e^(-s/(4(β₀+β)))]`, the mixing-averaged extra discount.
pub fn discount_expectation(tau: f64, model: &PricingModel) -> Result<f64> {
    require_positive("tau", tau)?;
    model.validate()?;
    let beta0 = model.cutoff.beta0;
    let knee = model.mixing.knee(0.0, 0.0);
    Ok(model
        .mixing
        .expect_ln(|beta| -0.25 * tau / (beta0 + beta), knee, &model.quadrature)?
        .exp())
}

/// Components of a kernel-route price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceBreakdown {
    pub price: f64,
    /// `∫ F(x) eˣ dx` over the exercise region.
    pub asset_weight: f64,
    /// `∫ F(x) dx` over the exercise region.
    pub strike_weight: f64,
}

/// Collects the first error raised inside an integrand, which must itself
/// return a plain float.
struct Guard(RefCell<Option<Error>>);

impl Guard {
    fn new() -> Self {
        Self(RefCell::new(None))
    }

    fn wrap(&self, r: Result<f64>) -> f64 {
        r.unwrap_or_else(|e| {
            self.0.borrow_mut().get_or_insert(e);
            f64::NAN
        })
    }

    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// `∫ exp(ln_g(x)) dx` over `[lo, ∞)` (`upper`) or `(-∞, lo]`, split at the
/// kernel centre `x = 0`.
fn tail_integral<L: Fn(f64) -> f64>(ln_g: &L, lo: f64, upper: bool, knee: f64, q: &QuadratureSpec) -> Result<f64> {
    let dir = if upper { 1.0 } else { -1.0 };
    let semi = |from: f64| -> Result<f64> {
        let est = integrate_exp_semi_infinite(|xi| ln_g(from + dir * xi), knee, q)?;
        Ok(est.ln_value.exp())
    };
    // Distance of the bound past the centre, in the integration direction.
    let ahead = -dir * lo;
    if lo.is_infinite() {
        return Ok(semi(0.0)? + semi_from_centre_back(ln_g, dir, knee, q)?);
    }
    if ahead <= 0.0 {
        return semi(lo);
    }
    let finite = integrate_finite(|x| ln_g(x).exp(), lo.min(0.0), lo.max(0.0), q)?;
    Ok(semi(0.0)? + finite.value)
}

fn semi_from_centre_back<L: Fn(f64) -> f64>(ln_g: &L, dir: f64, knee: f64, q: &QuadratureSpec) -> Result<f64> {
    let est = integrate_exp_semi_infinite(|xi| ln_g(-dir * xi), knee, q)?;
    Ok(est.ln_value.exp())
}

/// Kernel-route price `e^(-rs) ∫ F(y - y_T, s) V(y_T) dy_T`.
pub fn price_european_detailed(opt: &OptionSpec, model: &PricingModel, payoff: Payoff) -> Result<PriceBreakdown> {
    opt.validate()?;
    model.validate()?;
    let s = opt.tau();
    let q = &model.quadrature;
    let inner = q.with_tolerance(0.1 * q.rel_tol.min(q.abs_tol));
    let knee = model.y_integration_halfwidth;
    // Exercise boundary in the centred variable x = y_T - y - rs.
    let boundary = if opt.strike == 0.0 {
        f64::NEG_INFINITY
    } else {
        (opt.strike / opt.s0).ln() - opt.y - opt.rate * s
    };
    let upper = payoff == Payoff::Call;
    if !upper && opt.strike == 0.0 {
        return Ok(PriceBreakdown { price: 0.0, asset_weight: 0.0, strike_weight: 0.0 });
    }
    let guard = Guard::new();
    let ln_tilted = |x: f64| guard.wrap(ln_kernel(x, s, model, true, &inner));
    let ln_plain = |x: f64| guard.wrap(ln_kernel(x, s, model, false, &inner));
    let asset = tail_integral(&ln_tilted, boundary, upper, knee, q);
    let strike = tail_integral(&ln_plain, boundary, upper, knee, q);
    guard.check()?;
    let (asset_weight, strike_weight) = (asset?, strike?);
    let spot = opt.spot();
    let strike_pv = opt.strike * (-opt.rate * s).exp();
    let price = match payoff {
        Payoff::Call => spot * asset_weight - strike_pv * strike_weight,
        Payoff::Put => strike_pv * strike_weight - spot * asset_weight,
    };
    Ok(PriceBreakdown {
        price: price.max(0.0),
        asset_weight,
        strike_weight,
    })
}

/// Superstatistical European price by the kernel route.
pub fn price_european(opt: &OptionSpec, model: &PricingModel, payoff: Payoff) -> Result<f64> {
    Ok(price_european_detailed(opt, model, payoff)?.price)
}

/// The same price as the β-average of conditional prices,
/// `∫ V(y, t | β₀+β) f(β) dβ`.
pub fn price_beta_superposition(opt: &OptionSpec, model: &PricingModel, payoff: Payoff) -> Result<f64> {
    opt.validate()?;
    model.validate()?;
    let beta0 = model.cutoff.beta0;
    let guard = Guard::new();
    let knee = model.mixing.knee(0.0, 0.0);
    let est = model.mixing.expect_ln(
        |beta| guard.wrap(conditional_price_payoff(opt, beta0 + beta, payoff)).ln(),
        knee,
        &model.quadrature,
    );
    guard.check()?;
    Ok(est?.exp())
}

/// Hedge ratio `φ = e^(-y)/S₀ · ∂V/∂y` with the derivative from central
/// differences, Richardson-extrapolated once.
pub fn hedge_ratio(opt: &OptionSpec, model: &PricingModel) -> Result<f64> {
    opt.validate()?;
    let v = |y: f64| price_european(&opt.with_y(y), model, Payoff::Call);
    let central = |h: f64| -> Result<f64> { Ok((v(opt.y + h)? - v(opt.y - h)?) / (2.0 * h)) };
    let coarse = central(FD_STEP)?;
    let fine = central(0.5 * FD_STEP)?;
    let derivative = (4.0 * fine - coarse) / 3.0;
    let phi = derivative / opt.spot();
    if !phi.is_finite() {
        return Err(domain("hedge ratio is not finite"));
    }
    Ok(phi)
}
