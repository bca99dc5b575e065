//! Superstatistical models of log-returns with cut-off tails.
//!
//! The crate covers the full pipeline: special functions and quadrature
//! ([`specfun`]), marginal return densities built by superposing Gaussians
//! over a fluctuating inverse temperature ([`dist`]), calibration against
//! price series ([`estimation`], [`data_io`]) and European option pricing
//! with superposed Green-function kernels ([`pricing`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod estimation;
pub mod pricing;
pub mod data_io;
pub mod dist;
pub mod specfun;

pub use error::{Error, Result};
