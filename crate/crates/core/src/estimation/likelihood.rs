use crate::dist::ReturnDistribution;
use crate::error::{domain, Error, Result};
use crate::specfun::{PanelMoments, PiecewiseChebyshev};

/// Samples up to this size are evaluated point by point.
const DIRECT_LIMIT: usize = 4096;
/// Accepted relative size of trailing Chebyshev coefficients.
const TABLE_TOL: f64 = 1e-12;

/// A sample reduced to the statistics the likelihood needs.
///
/// Every supported density is `e^(-β₀x²)·exp(h(t))` with `t = asinh|x|` and
/// `h` smooth, so `Σ ln p(xᵢ) = -β₀Σxᵢ² + Σ h(tᵢ)`. The second sum is taken
/// by interpolating `h` on fixed panels and contracting with precomputed
/// Chebyshev moments of the `tᵢ`, which costs O(panels) per evaluation.
#[derive(Debug, Clone)]
pub struct PreparedSample {
    n: usize,
    sum_sq: f64,
    t: Vec<f64>,
    moments: Option<PanelMoments>,
}

impl PreparedSample {
    pub fn new(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Length("empty sample".into()));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("sample contains non-finite value {v}")));
        }
        let t: Vec<f64> = x.iter().map(|v| v.abs().asinh()).collect();
        let sum_sq = x.iter().map(|v| v * v).sum();
        let moments = if x.len() > DIRECT_LIMIT {
            let t_max = t.iter().copied().fold(0.0, f64::max);
            Some(PanelMoments::new(panel_breaks(t_max), t.iter().copied())?)
        } else {
            None
        };
        Ok(Self {
            n: x.len(),
            sum_sq,
            t,
            moments,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `-Σ ln p(xᵢ)`.
    pub fn negative_log_likelihood(&self, model: &ReturnDistribution) -> Result<f64> {
        let beta0 = model.cutoff().beta0;
        let envelope = beta0 * self.sum_sq;
        if model.n_params() == 1 {
            return Ok(envelope - self.n as f64 * model.ln_shape(0.0)?);
        }
        let h = |t: f64| model.ln_shape(t.sinh());
        let shape_sum = match &self.moments {
            None => {
                let mut sum = 0.0;
                for &t in &self.t {
                    sum += h(t)?;
                }
                sum
            }
            Some(moments) => {
                let table = PiecewiseChebyshev::on_breaks(h, moments.breaks())?;
                if table.tail() <= TABLE_TOL {
                    table.sum_over(moments)?
                } else {
                    let (lo, hi) = (moments.breaks()[0], *moments.breaks().last().expect("breaks"));
                    let table = PiecewiseChebyshev::build(h, lo, hi, TABLE_TOL)?;
                    self.t.iter().map(|&t| table.eval(t)).sum()
                }
            }
        };
        let nll = envelope - shape_sum;
        if !nll.is_finite() {
            return Err(Error::Overflow(format!("negative log-likelihood is {nll}")));
        }
        Ok(nll)
    }
}

/// Panels in `t`: geometric near the origin, where `h` varies on the scale
/// `√b`, then uniform.
fn panel_breaks(t_max: f64) -> Vec<f64> {
    const FIRST: f64 = 1e-3;
    const RATIO: f64 = 1.6;
    const WIDTH: f64 = 0.125;
    let end = t_max.max(FIRST) * (1.0 + 1e-12) + 1e-12;
    let mut breaks = vec![0.0];
    let mut width = FIRST;
    let mut at = 0.0;
    while at < end {
        at = (at + width).min(end);
        if end - at < 0.25 * width {
            at = end;
        }
        breaks.push(at);
        width = (width * RATIO).min(WIDTH);
    }
    breaks
}

/// `-Σ ln p(xᵢ)`, evaluated in log space.
pub fn negative_log_likelihood(x: &[f64], model: &ReturnDistribution) -> Result<f64> {
    PreparedSample::new(x)?.negative_log_likelihood(model)
}
