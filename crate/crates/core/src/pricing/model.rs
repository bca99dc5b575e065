use serde::{Deserialize, Serialize};

use crate::dist::{CutoffParams, MixingModel};
use crate::error::{domain, require_non_negative, require_positive, Result};
use crate::specfun::QuadratureSpec;

/// Contract and market state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    /// Spot at the reference time `t₀`.
    pub s0: f64,
    pub strike: f64,
    pub rate: f64,
    /// Valuation time.
    #[serde(default)]
    pub t: f64,
    pub maturity: f64,
    /// Current log-return, so that the spot is `s0·eʸ`.
    #[serde(default)]
    pub y: f64,
}

impl OptionSpec {
    pub fn new(s0: f64, strike: f64, rate: f64, t: f64, maturity: f64, y: f64) -> Result<Self> {
        let spec = Self { s0, strike, rate, t, maturity, y };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("s0", self.s0)?;
        require_non_negative("strike", self.strike)?;
        for (name, v) in [("rate", self.rate), ("t", self.t), ("maturity", self.maturity), ("y", self.y)] {
            if !v.is_finite() {
                return Err(domain(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.maturity > self.t) {
            return Err(domain(format!(
                "maturity {} must exceed valuation time {}",
                self.maturity, self.t
            )));
        }
        Ok(())
    }

    /// Time to maturity `T - t`.
    pub fn tau(&self) -> f64 {
        self.maturity - self.t
    }

    /// Current spot `s0·eʸ`.
    pub fn spot(&self) -> f64 {
        self.s0 * self.y.exp()
    }

    pub fn with_y(self, y: f64) -> Self {
        Self { y, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    ClosedForm,
    NumericQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payoff {
    Call,
    Put,
}

fn default_halfwidth() -> f64 {
    0.5
}

/// Superstatistical pricing model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingModel {
    pub mixing: MixingModel,
    #[serde(default)]
    pub cutoff: CutoffParams,
    pub kernel_mode: KernelMode,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    /// Scale of the terminal log-return integral, used to seed its
    /// quadrature; the integral itself always runs over the whole line.
    #[serde(default = "default_halfwidth")]
    pub y_integration_halfwidth: f64,
}

impl PricingModel {
    pub fn new(mixing: MixingModel, cutoff: CutoffParams, kernel_mode: KernelMode) -> Result<Self> {
        let model = Self {
            mixing,
            cutoff,
            kernel_mode,
            quadrature: QuadratureSpec::default(),
            y_integration_halfwidth: default_halfwidth(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_quadrature(self, quadrature: QuadratureSpec) -> Self {
        Self { quadrature, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        MixingModel::new(self.mixing.family, self.mixing.a, self.mixing.b)?;
        require_non_negative("beta0", self.cutoff.beta0)?;
        self.quadrature.validate()?;
        require_positive("y_integration_halfwidth", self.y_integration_halfwidth)?;
        if self.kernel_mode == KernelMode::ClosedForm && self.cutoff.beta0 != 0.0 {
            return Err(domain("closed-form kernels exist only without cut-off; use numeric_quadrature"));
        }
        Ok(())
    }
}
