//! Modified Bessel function of the second kind `K_ν(z)` for real order and
//! positive real argument.
//!
//! The fractional part `μ ∈ [-1/2, 1/2)` of the order is evaluated with
//! Temme's series for `z < 2` and with Steed's continued fraction otherwise;
//! integer steps in the order follow by forward recurrence, which is stable
//! for `K`. Values are carried as `eᶻ·K` together with a binary exponent so
//! that the log form never overflows.

use std::f64::consts::PI;

use super::gamma::temme_gammas;
use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const RESCALE: f64 = 1e250;

/// `(eᶻ·K_ν(z), eᶻ·K_{ν+1}(z))` for `ν` already reduced to `|ν| <= 1/2`.
fn scaled_pair_fractional(mu: f64, z: f64) -> (f64, f64) {
    if z < 2.0 {
        let half = 0.5 * z;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -half.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2) = temme_gammas(mu);
        let gampl = super::gamma::recip_gamma_1p(mu);
        let gammi = super::gamma::recip_gamma_1p(-mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let e = e.exp();
        let mut p = 0.5 * e / gampl;
        let mut q = 0.5 / (e * gammi);
        let mut c = 1.0;
        let dd = half * half;
        let mut sum1 = p;
        let mu2 = mu * mu;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let scale = z.exp();
        (sum * scale, sum1 * (2.0 / z) * scale)
    } else {
        let mut b = 2.0 * (1.0 + z);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        let h = a1 * h;
        let kmu = (PI / (2.0 * z)).sqrt() / s;
        let k1 = kmu * (mu + z + 0.5 - h) / z;
        (kmu, k1)
    }
}

/// `eᶻ·K_ν(z) = mantissa · RESCALE^exponent`.
fn scaled_with_exponent(nu: f64, z: f64) -> (f64, i32) {
    let nu = nu.abs();
    let n = (nu + 0.5).floor();
    let mu = nu - n;
    let (mut k_lo, mut k_hi) = scaled_pair_fractional(mu, z);
    let mut exponent = 0;
    let two_over_z = 2.0 / z;
    for i in 1..=(n as usize) {
        let next = (mu + i as f64) * two_over_z * k_hi + k_lo;
        k_lo = k_hi;
        k_hi = next;
        if k_hi.abs() > RESCALE {
            k_lo /= RESCALE;
            k_hi /= RESCALE;
            exponent += 1;
        }
    }
    (k_lo, exponent)
}

fn check_args(nu: f64, z: f64) -> Result<()> {
    if !nu.is_finite() {
        return Err(domain(format!("Bessel order must be finite, got {nu}")));
    }
    if !(z > 0.0) || z.is_nan() || z.is_infinite() {
        return Err(domain(format!("bessel_k requires finite z > 0, got {z}")));
    }
    Ok(())
}

/// `ln K_ν(z)`; finite wherever the arguments are valid.
pub fn ln_bessel_k(nu: f64, z: f64) -> Result<f64> {
    check_args(nu, z)?;
    let (mantissa, exponent) = scaled_with_exponent(nu, z);
    Ok(mantissa.ln() + exponent as f64 * RESCALE.ln() - z)
}

/// `ln(eᶻ·K_ν(z))`, accurate for large `z` where `K_ν` itself underflows.
pub fn ln_bessel_k_scaled(nu: f64, z: f64) -> Result<f64> {
    check_args(nu, z)?;
    let (mantissa, exponent) = scaled_with_exponent(nu, z);
    Ok(mantissa.ln() + exponent as f64 * RESCALE.ln())
}

/// Exponentially scaled `eᶻ·K_ν(z)`.
pub fn bessel_k_scaled(nu: f64, z: f64) -> Result<f64> {
    check_args(nu, z)?;
    let (mantissa, exponent) = scaled_with_exponent(nu, z);
    if exponent != 0 {
        return Err(Error::Overflow(format!("e^z K_{nu}({z}) exceeds f64 range")));
    }
    Ok(mantissa)
}

/// Modified Bessel function of the second kind, `K_ν(z) = K_{-ν}(z)`.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    let ln = ln_bessel_k(nu, z)?;
    let value = ln.exp();
    if value == 0.0 || !value.is_finite() {
        return Err(Error::Overflow(format!(
            "K_{nu}({z}) = exp({ln:.3}) is not representable; use ln_bessel_k"
        )));
    }
    Ok(value)
}
