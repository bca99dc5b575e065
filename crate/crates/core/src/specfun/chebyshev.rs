//! Piecewise Chebyshev interpolation of smooth scalar functions, used to
//! evaluate expensive densities on large samples.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const NODES: usize = 17;
const MAX_PANELS: usize = 4096;

#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev {
    breaks: Vec<f64>,
    coeffs: Vec<[f64; NODES]>,
    /// Largest trailing-coefficient size relative to `max(1, max|f|)`.
    tail: f64,
}

/// Per-panel sums `Σᵢ T_k(uᵢ)` of a fixed point set, where `uᵢ` is the
/// position of point `i` mapped onto `[-1, 1]` within its panel. Lets the
/// sum of an interpolant over many points be formed in O(panels).
#[derive(Debug, Clone)]
pub struct PanelMoments {
    breaks: Vec<f64>,
    sums: Vec<[f64; NODES]>,
    count: usize,
}

impl PanelMoments {
    pub fn new<I: IntoIterator<Item = f64>>(breaks: Vec<f64>, points: I) -> Result<Self> {
        check_breaks(&breaks)?;
        let mut sums = vec![[0.0; NODES]; breaks.len() - 1];
        let mut count = 0;
        let (lo, hi) = (breaks[0], breaks[breaks.len() - 1]);
        for t in points {
            if !(t >= lo && t <= hi) {
                return Err(domain(format!("point {t} outside [{lo}, {hi}]")));
            }
            let idx = panel_of(&breaks, t);
            let (a, b) = (breaks[idx], breaks[idx + 1]);
            let x = ((2.0 * t - a - b) / (b - a)).clamp(-1.0, 1.0);
            let row = &mut sums[idx];
            let (mut prev, mut cur) = (1.0, x);
            row[0] += 1.0;
            row[1] += x;
            for slot in row.iter_mut().skip(2) {
                let next = 2.0 * x * cur - prev;
                *slot += next;
                prev = cur;
                cur = next;
            }
            count += 1;
        }
        Ok(Self { breaks, sums, count })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

fn check_breaks(breaks: &[f64]) -> Result<()> {
    if breaks.len() < 2 || breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("panel breaks must be finite and strictly increasing"));
    }
    Ok(())
}

fn panel_of(breaks: &[f64], t: f64) -> usize {
    breaks
        .partition_point(|&b| b <= t)
        .saturating_sub(1)
        .min(breaks.len() - 2)
}

impl PiecewiseChebyshev {
    /// Interpolates `f` on `[lo, hi]`, halving panels until the trailing
    /// coefficients fall below `tol · max(1, max|f|)` on every panel.
    pub fn build<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(domain(format!("invalid interpolation range [{lo}, {hi}]")));
        }
        let min_width = (hi - lo) * 1e-9;
        let mut pending: Vec<(f64, f64)> = (0..4)
            .rev()
            .map(|i| {
                let w = (hi - lo) / 4.0;
                (lo + i as f64 * w, if i == 3 { hi } else { lo + (i + 1) as f64 * w })
            })
            .collect();
        let mut panels: Vec<(f64, f64, [f64; NODES])> = Vec::new();
        let mut worst = 0.0_f64;
        while let Some((a, b)) = pending.pop() {
            let (coeffs, magnitude) = fit_panel(&mut f, a, b)?;
            let tail = relative_tail(&coeffs, magnitude);
            let converged = tail <= tol;
            if converged || b - a < min_width || panels.len() + pending.len() >= MAX_PANELS {
                worst = worst.max(tail);
                panels.push((a, b, coeffs));
            } else {
                let mid = 0.5 * (a + b);
                pending.push((mid, b));
                pending.push((a, mid));
            }
        }
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut breaks: Vec<f64> = panels.iter().map(|p| p.0).collect();
        breaks.push(hi);
        Ok(Self {
            breaks,
            coeffs: panels.into_iter().map(|p| p.2).collect(),
            tail: worst,
        })
    }

    /// Interpolates `f` on the given panels without refinement.
    pub fn on_breaks<F>(mut f: F, breaks: &[f64]) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        check_breaks(breaks)?;
        let mut coeffs = Vec::with_capacity(breaks.len() - 1);
        let mut worst = 0.0_f64;
        for w in breaks.windows(2) {
            let (c, magnitude) = fit_panel(&mut f, w[0], w[1])?;
            worst = worst.max(relative_tail(&c, magnitude));
            coeffs.push(c);
        }
        Ok(Self {
            breaks: breaks.to_vec(),
            coeffs,
            tail: worst,
        })
    }

    /// Size of the trailing coefficients relative to `max(1, max|f|)`, a
    /// proxy for the interpolation error.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `Σᵢ p(tᵢ)` over the points summarised by `moments`, which must share
    /// this interpolant's breaks.
    pub fn sum_over(&self, moments: &PanelMoments) -> Result<f64> {
        if moments.breaks != self.breaks {
            return Err(domain("moments were built on different panels"));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&moments.sums)
            .map(|(c, m)| c.iter().zip(m).map(|(a, b)| a * b).sum::<f64>())
            .sum())
    }

    pub fn panels(&self) -> usize {
        self.coeffs.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().expect("non-empty"))
    }

    /// Evaluates the interpolant; arguments outside the domain are clamped.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.domain();
        let t = t.clamp(lo, hi);
        let idx = panel_of(&self.breaks, t);
        let (a, b) = (self.breaks[idx], self.breaks[idx + 1]);
        let x = (2.0 * t - a - b) / (b - a);
        clenshaw(&self.coeffs[idx], x)
    }
}

fn relative_tail(coeffs: &[f64; NODES], magnitude: f64) -> f64 {
    (coeffs[NODES - 1].abs() + coeffs[NODES - 2].abs()) / magnitude.max(1.0)
}

fn fit_panel<F>(f: &mut F, a: f64, b: f64) -> Result<([f64; NODES], f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = NODES as f64;
    let mut values = [0.0; NODES];
    let mut magnitude = 0.0_f64;
    for (j, v) in values.iter_mut().enumerate() {
        let x = (PI * (j as f64 + 0.5) / n).cos();
        *v = f(0.5 * (a + b) + 0.5 * (b - a) * x)?;
        if !v.is_finite() {
            return Err(domain("interpolated function is not finite"));
        }
        magnitude = magnitude.max(v.abs());
    }
    let mut coeffs = [0.0; NODES];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let sum: f64 = values
            .iter()
            .enumerate()
            .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / n).cos())
            .sum();
        *c = 2.0 * sum / n;
    }
    coeffs[0] *= 0.5;
    Ok((coeffs, magnitude))
}

fn clenshaw(c: &[f64; NODES], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_functions() {
        let table = PiecewiseChebyshev::build(|t: f64| Ok(t.sin() + 0.1 * t * t), -3.0, 5.0, 1e-14).unwrap();
        for i in 0..=1000 {
            let t = -3.0 + 8.0 * i as f64 / 1000.0;
            assert!((table.eval(t) - (t.sin() + 0.1 * t * t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn refines_near_kinks() {
        let f = |t: f64| t.abs().powf(1.5);
        let table = PiecewiseChebyshev::build(|t| Ok(f(t)), -1.0, 1.0, 1e-12).unwrap();
        assert!(table.panels() > 8);
        for i in 0..=200 {
            let t = -1.0 + i as f64 / 100.0;
            assert!((table.eval(t) - f(t)).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn moments_reproduce_pointwise_sums() {
        let breaks = vec![0.0, 0.1, 0.5, 1.5, 4.0];
        let f = |t: f64| (1.0 + t * t).ln() - 0.3 * t;
        let table = PiecewiseChebyshev::on_breaks(|t| Ok(f(t)), &breaks).unwrap();
        assert!(table.tail() < 1e-10);
        let points: Vec<f64> = (0..=997).map(|i| 4.0 * (i as f64 / 997.0).powi(2)).collect();
        let moments = PanelMoments::new(breaks, points.iter().copied()).unwrap();
        assert_eq!(moments.count(), points.len());
        let direct: f64 = points.iter().map(|&t| table.eval(t)).sum();
        let fast = table.sum_over(&moments).unwrap();
        assert!((direct - fast).abs() < 1e-10 * direct.abs(), "{direct} vs {fast}");
        let exact: f64 = points.iter().map(|&t| f(t)).sum();
        assert!((exact - fast).abs() < 1e-8, "{exact} vs {fast}");
        assert!(PanelMoments::new(vec![0.0, 1.0], [2.0]).is_err());
    }

    #[test]
    fn clamps_outside_domain() {
        let table = PiecewiseChebyshev::build(|t| Ok(2.0 * t), 0.0, 1.0, 1e-14).unwrap();
        assert!((table.eval(2.0) - 2.0).abs() < 1e-13);
        assert!(table.eval(-1.0).abs() < 1e-13);
    }
}
