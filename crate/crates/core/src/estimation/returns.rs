use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// `ln p[i+lag] - ln p[i]` for every valid `i`.
pub fn log_returns(prices: &[f64], lag: usize) -> Result<Vec<f64>> {
    if lag == 0 {
        return Err(domain("lag must be >= 1"));
    }
    if prices.len() <= lag {
        return Err(Error::Length(format!(
            "need more than {lag} prices for lag {lag}, got {}",
            prices.len()
        )));
    }
    if let Some((i, p)) = prices.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
        return Err(domain(format!("price at index {i} must be finite and > 0, got {p}")));
    }
    Ok(prices
        .iter()
        .zip(&prices[lag..])
        .map(|(a, b)| b.ln() - a.ln())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardized {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation (divisor n).
    pub std: f64,
}

/// Shifts and scales to zero mean and unit population variance.
pub fn standardize(x: &[f64]) -> Result<Standardized> {
    if x.len() < 2 {
        return Err(Error::Length(format!("standardize needs >= 2 values, got {}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(domain("standardize input contains non-finite values"));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if !(std > 0.0) || std <= 1e-300 {
        return Err(Error::Degenerate("input has zero variance".into()));
    }
    Ok(Standardized {
        values: x.iter().map(|v| (v - mean) / std).collect(),
        mean,
        std,
    })
}

/// Equal-width density histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPdf {
    pub bin_centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_total: u64,
    pub bin_width: f64,
}

pub fn empirical_pdf(x: &[f64], n_bins: usize) -> Result<EmpiricalPdf> {
    if n_bins == 0 {
        return Err(domain("n_bins must be >= 1"));
    }
    if x.len() < n_bins {
        return Err(Error::Length(format!("{} values for {n_bins} bins", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(domain("histogram input contains non-finite values"));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Degenerate("all values are equal".into()));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &v in x {
        let idx = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let n = x.len() as f64;
    Ok(EmpiricalPdf {
        bin_centers: (0..n_bins).map(|i| lo + (i as f64 + 0.5) * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / (n * width)).collect(),
        counts,
        n_total: x.len() as u64,
        bin_width: width,
    })
}
