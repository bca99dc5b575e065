//! Log-returns, standardization, histograms and maximum-likelihood fits.

mod fit;
mod likelihood;
mod optimize;
mod returns;

pub use fit::{fit_mle, model_compare, FitOptions, FitResult, ModelFamily, BETA0_FLOOR};
pub use likelihood::{negative_log_likelihood, PreparedSample};
pub use optimize::{nelder_mead, Minimum, NelderMeadOptions};
pub use returns::{empirical_pdf, log_returns, standardize, EmpiricalPdf, Standardized};
