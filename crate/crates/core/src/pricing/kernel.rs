use std::f64::consts::{LN_2, PI};

use crate::dist::MixingModel;
use crate::error::{domain, require_positive, Result};
use crate::specfun::{ln_bessel_k_scaled, ln_gamma_positive, QuadratureSpec};

use super::model::{KernelMode, PricingModel};

/// Green function of the log-return pricing equation: a Gaussian in `y`
/// with mean `-r·s` and variance `s/(2β)`.
pub fn green_function(y: f64, s: f64, beta: f64, rate: f64) -> Result<f64> {
    require_positive("s", s)?;
    require_positive("beta", beta)?;
    if !(y.is_finite() && rate.is_finite()) {
        return Err(domain("y and rate must be finite"));
    }
    let w = y + rate * s;
    Ok((beta / (PI * s)).sqrt() * (-beta * w * w / s).exp())
}

/// `ln F̂(x)` for the gamma closed form, where `x` is the centred log-return
/// `y + r·s`; with `tilt` the result is `ln(F̂(x)·eˣ)`.
///
/// `F̂ = √(2/π) (bs/2)ᵃ / Γ(a) · ζ^(-(2a+1)/4) · K_{a+½}(√ζ)`, `ζ = x² + bs`.
pub(crate) fn ln_kernel_gamma(x: f64, s: f64, a: f64, b: f64, tilt: bool) -> Result<f64> {
    let bs = b * s;
    let zeta = x * x + bs;
    let z = zeta.sqrt();
    let head = 0.5 * (2.0 / PI).ln() + a * (0.5 * bs).ln() - ln_gamma_positive(a) - 0.25 * (2.0 * a + 1.0) * zeta.ln();
    let exponent = match (tilt, x > 0.0) {
        (false, _) => -z,
        (true, true) => -bs / (z + x),
        (true, false) => x - z,
    };
    Ok(head + ln_bessel_k_scaled(a + 0.5, z)? + exponent)
}

/// `ln F̂(x)` for the inverse-gamma closed form, `f(β) ∝ β^(-a-1) e^(-b/β)`:
///
/// `F̂ = 2bᵃ/(Γ(a)√(πs)) · (4x²/(s(s+4b)))^((2a-1)/4) · K_{a-½}(|x|√((s+4b)/s))`.
///
/// At `x = 0` the finite limit is used, which exists only for `a > ½`.
pub(crate) fn ln_kernel_invgamma(x: f64, s: f64, a: f64, b: f64, tilt: bool) -> Result<f64> {
    let base = a * b.ln() - ln_gamma_positive(a) - 0.5 * (PI * s).ln();
    if x == 0.0 {
        if a <= 0.5 {
            return Err(domain(format!(
                "inverse-gamma kernel is singular at y = -r·s for a = {a} <= 1/2"
            )));
        }
        return Ok(base + ln_gamma_positive(a - 0.5) - (a - 0.5) * (0.25 * s + b).ln());
    }
    let ratio = 4.0 * b / s;
    let c = (1.0 + ratio).sqrt();
    let eta = x.abs() * c;
    let xi4 = 4.0 * x * x / (s * (s + 4.0 * b));
    let exponent = match (tilt, x > 0.0) {
        (false, _) => -eta,
        (true, true) => -x * ratio / (c + 1.0),
        (true, false) => x - eta,
    };
    Ok(LN_2 + base + 0.25 * (2.0 * a - 1.0) * xi4.ln() + ln_bessel_k_scaled(a - 0.5, eta)? + exponent)
}

/// `ln F̂(x)` by quadrature over β, with the cut-off folded in as
/// `β → β₀ + β`.
pub(crate) fn ln_kernel_quadrature(
    x: f64,
    s: f64,
    mixing: &MixingModel,
    beta0: f64,
    tilt: bool,
    q: &QuadratureSpec,
) -> Result<f64> {
    let ln_norm = -0.5 * (PI * s).ln();
    let knee = mixing.knee(0.5, x * x / s + 0.25 * s / (beta0 + mixing.typical_beta()).powi(2));
    mixing.expect_ln(
        |beta| {
            let total = beta0 + beta;
            let root = (total / s).sqrt();
            let exponent = if tilt {
                // -(βx²/s) - s/(4β) + x as a perfect square.
                let d = root * x - 0.5 / root;
                -d * d
            } else {
                -total * x * x / s - 0.25 * s / total
            };
            ln_norm + 0.5 * total.ln() + exponent
        },
        knee,
        q,
    )
}

/// Dispatches on the model's kernel mode.
pub(crate) fn ln_kernel(x: f64, s: f64, model: &PricingModel, tilt: bool, q: &QuadratureSpec) -> Result<f64> {
    let m = &model.mixing;
    match model.kernel_mode {
        KernelMode::ClosedForm => match m.family {
            crate::dist::MixingFamily::Gamma => ln_kernel_gamma(x, s, m.a, m.b, tilt),
            crate::dist::MixingFamily::InverseGamma => ln_kernel_invgamma(x, s, m.a, m.b, tilt),
        },
        KernelMode::NumericQuadrature => ln_kernel_quadrature(x, s, m, model.cutoff.beta0, tilt, q),
    }
}

fn check_kernel_args(y: f64, s: f64, a: f64, b: f64, rate: f64) -> Result<()> {
    require_positive("s", s)?;
    require_positive("a", a)?;
    require_positive("b", b)?;
    if !(y.is_finite() && rate.is_finite()) {
        return Err(domain("y and rate must be finite"));
    }
    Ok(())
}

/// Kernel `F(y, s)` for gamma mixing without cut-off, in closed form.
pub fn kernel_gamma_closed(y: f64, s: f64, a: f64, b: f64, rate: f64) -> Result<f64> {
    check_kernel_args(y, s, a, b, rate)?;
    Ok(ln_kernel_gamma(y + rate * s, s, a, b, false)?.exp())
}

/// Kernel `F(y, s)` for inverse-gamma mixing without cut-off, in closed
/// form.
pub fn kernel_invgamma_closed(y: f64, s: f64, a: f64, b: f64, rate: f64) -> Result<f64> {
    check_kernel_args(y, s, a, b, rate)?;
    Ok(ln_kernel_invgamma(y + rate * s, s, a, b, false)?.exp())
}

/// Kernel `F(y, s) = ∫ e^(-s/(4(β₀+β))) G(y, s | β₀+β) f(β) dβ` by
/// quadrature.
pub fn kernel_numeric(y: f64, s: f64, rate: f64, model: &PricingModel) -> Result<f64> {
    model.validate()?;
    require_positive("s", s)?;
    if !(y.is_finite() && rate.is_finite()) {
        return Err(domain("y and rate must be finite"));
    }
    let x = y + rate * s;
    Ok(ln_kernel_quadrature(x, s, &model.mixing, model.cutoff.beta0, false, &model.quadrature)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{CutoffParams, MixingModel};
    use crate::pricing::discount_expectation;
    use crate::specfun::integrate_finite;

    fn numeric(mixing: MixingModel) -> PricingModel {
        PricingModel::new(mixing, CutoffParams::none(), KernelMode::NumericQuadrature).unwrap()
    }

    #[test]
    fn green_function_moments() {
        let (s, beta, r) = (0.7, 3.0, 0.05);
        let q = QuadratureSpec::default();
        let centre = -r * s;
        let mass = integrate_finite(|y| green_function(y, s, beta, r).unwrap(), centre - 8.0, centre + 8.0, &q)
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-12);
        let peak = green_function(centre, s, beta, r).unwrap();
        assert!((peak - (beta / (PI * s)).sqrt()).abs() < 1e-15);
        let m2 = integrate_finite(
            |y| (y - centre).powi(2) * green_function(y, s, beta, r).unwrap(),
            centre - 8.0,
            centre + 8.0,
            &q,
        )
        .unwrap()
        .value;
        assert!((m2 - s / (2.0 * beta)).abs() < 1e-12);
    }

    #[test]
    fn gamma_closed_form_matches_quadrature() {
        let r = 0.05;
        for (a, b) in [(1.0, 1.0), (0.904, 0.571)] {
            let model = numeric(MixingModel::gamma(a, b).unwrap());
            for s in [0.1, 0.5, 1.0] {
                for i in -12..=12 {
                    let y = 0.25 * i as f64;
                    let closed = kernel_gamma_closed(y, s, a, b, r).unwrap();
                    let quad = kernel_numeric(y, s, r, &model).unwrap();
                    assert!((closed / quad - 1.0).abs() < 1e-9, "a={a} s={s} y={y}: {closed} vs {quad}");
                }
                let left = kernel_gamma_closed(-r * s - 0.7, s, a, b, r).unwrap();
                let right = kernel_gamma_closed(-r * s + 0.7, s, a, b, r).unwrap();
                assert!((left / right - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn invgamma_closed_form_matches_quadrature() {
        let r = 0.05;
        for (a, b) in [(1.0, 1.0), (0.904, 0.571), (3.0, 0.1)] {
            let model = numeric(MixingModel::inverse_gamma(a, b).unwrap());
            for s in [0.1, 0.5, 1.0] {
                for i in -12..=12 {
                    let y = 0.25 * i as f64 - r * s + 1e-3;
                    let closed = kernel_invgamma_closed(y, s, a, b, r).unwrap();
                    assert!(closed > 0.0);
                    let quad = kernel_numeric(y, s, r, &model).unwrap();
                    assert!((closed / quad - 1.0).abs() < 1e-9, "a={a} b={b} s={s} y={y}: {closed} vs {quad}");
                }
                // Finite limit at the centre.
                let centre = kernel_invgamma_closed(-r * s, s, a, b, r).unwrap();
                let quad = kernel_numeric(-r * s, s, r, &model).unwrap();
                assert!((centre / quad - 1.0).abs() < 1e-9);
            }
        }
        assert!(kernel_invgamma_closed(-0.05, 1.0, 0.5, 1.0, 0.05).is_err());
    }

    #[test]
    fn invgamma_bessel_argument() {
        // η = |y + rs|·√((s + 4b)/s) is √2 for |y + rs| = 1, s = 1, b = 1/4.
        let (s, b) = (1.0_f64, 0.25_f64);
        let eta = 1.0 * ((s + 4.0 * b) / s).sqrt();
        assert!((eta - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn concentrated_mixing_gives_discounted_green_function() {
        let (beta, s, r) = (12.5, 1.0, 0.05);
        let model = numeric(MixingModel::gamma(1e6, 1e6 / beta).unwrap());
        for y in [-0.5, -0.05, 0.0, 0.2, 0.6] {
            let f = kernel_numeric(y, s, r, &model).unwrap();
            let expected = (-0.25 * s / beta).exp() * green_function(y, s, beta, r).unwrap();
            assert!((f / expected - 1.0).abs() < 1e-4, "y={y}: {f} vs {expected}");
        }
    }

    #[test]
    fn kernel_mass_is_the_discount() {
        let q = QuadratureSpec::default();
        let r = 0.05;
        for s in [0.1, 1.0, 3.0] {
            let model = numeric(MixingModel::gamma(0.904, 0.571).unwrap());
            let c = -r * s;
            let mass = integrate_finite(|y| kernel_gamma_closed(y, s, 0.904, 0.571, r).unwrap(), c, c + 200.0, &q)
                .unwrap()
                .value
                * 2.0;
            let d = discount_expectation(s, &model).unwrap();
            assert!(mass <= 1.0);
            assert!((mass / d - 1.0).abs() < 1e-6, "s={s}: {mass} vs {d}");
        }
    }
}
