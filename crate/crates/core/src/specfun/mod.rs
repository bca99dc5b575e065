//! Special functions and quadrature primitives.

mod bessel;
mod chebyshev;
mod gamma;
mod quadrature;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k, ln_bessel_k_scaled};
pub use chebyshev::{PanelMoments, PiecewiseChebyshev};
pub use gamma::{gamma, generalized_gamma, ln_generalized_gamma, log_gamma};
pub(crate) use gamma::ln_gamma_positive;
pub use quadrature::{
    integrate_exp_semi_infinite, integrate_finite, integrate_semi_infinite,
    integrate_semi_infinite_scaled, Estimate, LogEstimate, QuadratureSpec,
};
