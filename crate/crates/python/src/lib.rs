//! Python bindings: return densities, sampling, fitting, pricing and CSV
//! loading.

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use superstat_core::data_io::{self, CsvOptions};
use superstat_core::dist::{CutoffParams, MixingModel, ModelSpec};
use superstat_core::estimation::{self, FitOptions, ModelFamily};
use superstat_core::pricing::{self, KernelMode, OptionSpec, Payoff, PricingModel};
use superstat_core::specfun::{self, QuadratureSpec};
use superstat_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Domain(_)
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::Length(_)
        | Error::Degenerate(_)
        | Error::MismatchedObservations { .. } => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn quadrature(abs_tol: Option<f64>, rel_tol: Option<f64>) -> PyResult<QuadratureSpec> {
    let d = QuadratureSpec::default();
    let q = QuadratureSpec {
        abs_tol: abs_tol.unwrap_or(d.abs_tol),
        rel_tol: rel_tol.unwrap_or(d.rel_tol),
        ..d
    };
    q.validate().map_err(py_err)?;
    Ok(q)
}

fn mixing(family: &str, a: f64, b: f64) -> PyResult<MixingModel> {
    match family {
        "gamma" => MixingModel::gamma(a, b),
        "inverse_gamma" => MixingModel::inverse_gamma(a, b),
        other => return Err(PyValueError::new_err(format!("unknown mixing family '{other}'"))),
    }
    .map_err(py_err)
}

/// Symmetric marginal density of log-returns.
#[pyclass(name = "ReturnDistribution", module = "superstat", frozen)]
struct PyReturnDistribution {
    inner: superstat_core::dist::ReturnDistribution,
}

#[pymethods]
impl PyReturnDistribution {
    #[staticmethod]
    fn gaussian(beta0: f64) -> PyResult<Self> {
        let inner = superstat_core::dist::ReturnDistribution::gaussian(beta0).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn superstat_gamma(a: f64, b: f64) -> PyResult<Self> {
        let inner = superstat_core::dist::ReturnDistribution::superstat_gamma(a, b).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (a, b, beta0, abs_tol=None, rel_tol=None))]
    fn cutoff_gamma(a: f64, b: f64, beta0: f64, abs_tol: Option<f64>, rel_tol: Option<f64>) -> PyResult<Self> {
        let q = quadrature(abs_tol, rel_tol)?;
        let inner = superstat_core::dist::ReturnDistribution::cutoff_gamma(a, b, beta0, &q).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Superposition over a `"gamma"` or `"inverse_gamma"` mixing density,
    /// evaluated by quadrature.
    #[staticmethod]
    #[pyo3(signature = (family, a, b, beta0=0.0, abs_tol=None, rel_tol=None))]
    fn numeric(
        family: &str,
        a: f64,
        b: f64,
        beta0: f64,
        abs_tol: Option<f64>,
        rel_tol: Option<f64>,
    ) -> PyResult<Self> {
        let q = quadrature(abs_tol, rel_tol)?;
        let cutoff = CutoffParams::new(beta0).map_err(py_err)?;
        let inner = superstat_core::dist::ReturnDistribution::numeric(mixing(family, a, b)?, cutoff, &q).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn pdf(&self, x: f64) -> PyResult<f64> {
        self.inner.pdf(x).map_err(py_err)
    }

    fn ln_pdf(&self, x: f64) -> PyResult<f64> {
        self.inner.ln_pdf(x).map_err(py_err)
    }

    fn pdf_many(&self, xs: Vec<f64>) -> PyResult<Vec<f64>> {
        xs.into_iter().map(|x| self.inner.pdf(x).map_err(py_err)).collect()
    }

    fn variance(&self) -> PyResult<f64> {
        self.inner.variance().map_err(py_err)
    }

    #[pyo3(signature = (n, seed=0))]
    fn sample(&self, py: Python<'_>, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        py.detach(|| self.inner.sample(n, seed)).map_err(py_err)
    }

    fn negative_log_likelihood(&self, x: Vec<f64>) -> PyResult<f64> {
        estimation::negative_log_likelihood(&x, &self.inner).map_err(py_err)
    }

    /// Family name and parameters as a dict.
    fn params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        match self.inner.spec() {
            ModelSpec::Gaussian { beta0 } => {
                d.set_item("family", "gaussian")?;
                d.set_item("beta0", beta0)?;
            }
            ModelSpec::SuperstatGamma { a, b } => {
                d.set_item("family", "superstat_gamma")?;
                d.set_item("a", a)?;
                d.set_item("b", b)?;
            }
            ModelSpec::CutoffSuperstatGamma { a, b, beta0 } => {
                d.set_item("family", "cutoff_superstat_gamma")?;
                d.set_item("a", a)?;
                d.set_item("b", b)?;
                d.set_item("beta0", beta0)?;
            }
            ModelSpec::Numeric { mixing, beta0 } => {
                d.set_item("family", "numeric")?;
                d.set_item("mixing", format!("{:?}", mixing.family).to_lowercase())?;
                d.set_item("a", mixing.a)?;
                d.set_item("b", mixing.b)?;
                d.set_item("beta0", beta0)?;
            }
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("ReturnDistribution({:?})", self.inner.spec())
    }
}

/// Outcome of a maximum-likelihood fit.
#[pyclass(name = "FitResult", module = "superstat", frozen, get_all)]
struct PyFitResult {
    family: String,
    log_likelihood: f64,
    aic: f64,
    n_obs: usize,
    converged: bool,
    n_restarts_used: usize,
    evaluations: usize,
    distribution: Py<PyReturnDistribution>,
}

#[pymethods]
impl PyFitResult {
    fn __repr__(&self) -> String {
        format!(
            "FitResult(family={}, log_likelihood={}, aic={}, converged={})",
            self.family, self.log_likelihood, self.aic, self.converged
        )
    }
}

fn to_py_fit(py: Python<'_>, f: estimation::FitResult) -> PyResult<PyFitResult> {
    Ok(PyFitResult {
        family: f.family.as_str().to_owned(),
        log_likelihood: f.log_likelihood,
        aic: f.aic,
        n_obs: f.n_obs,
        converged: f.converged,
        n_restarts_used: f.n_restarts_used,
        evaluations: f.evaluations,
        distribution: Py::new(py, PyReturnDistribution { inner: f.model })?,
    })
}

/// Fits each named family to `x` and returns the results ranked by AIC.
#[pyfunction]
#[pyo3(signature = (x, families=vec!["gaussian".to_owned(), "superstat_gamma".to_owned(), "cutoff_superstat_gamma".to_owned()], restarts=4, seed=0))]
fn fit(py: Python<'_>, x: Vec<f64>, families: Vec<String>, restarts: usize, seed: u64) -> PyResult<Vec<PyFitResult>> {
    let families = families
        .iter()
        .map(|f| f.parse::<ModelFamily>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let opts = FitOptions { restarts, seed, ..FitOptions::default() };
    let ranked = py
        .detach(|| {
            let fits = families
                .into_iter()
                .map(|f| estimation::fit_mle(&x, f, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            estimation::model_compare(&fits)
        })
        .map_err(py_err)?;
    ranked.into_iter().map(|f| to_py_fit(py, f)).collect()
}

#[pyfunction]
#[pyo3(signature = (prices, lag=1))]
fn log_returns(prices: Vec<f64>, lag: usize) -> PyResult<Vec<f64>> {
    estimation::log_returns(&prices, lag).map_err(py_err)
}

/// Returns `(values, mean, std)`.
#[pyfunction]
fn standardize(x: Vec<f64>) -> PyResult<(Vec<f64>, f64, f64)> {
    let s = estimation::standardize(&x).map_err(py_err)?;
    Ok((s.values, s.mean, s.std))
}

/// Loads a `timestamp,price` file; returns `(timestamps, prices, symbol)`.
#[pyfunction]
#[pyo3(signature = (path, symbol=None))]
fn load_csv(path: std::path::PathBuf, symbol: Option<String>) -> PyResult<(Vec<i64>, Vec<f64>, String)> {
    let s = data_io::load_csv(&path, &CsvOptions { symbol }).map_err(py_err)?;
    Ok((s.timestamps, s.prices, s.symbol))
}

/// Superstatistical option model.
#[pyclass(name = "PricingModel", module = "superstat", frozen)]
struct PyPricingModel {
    inner: PricingModel,
}

#[pymethods]
impl PyPricingModel {
    /// `kernel_mode` is `"closed_form"` or `"numeric_quadrature"`; the
    /// default picks closed form when there is no cut-off.
    #[new]
    #[pyo3(signature = (family, a, b, beta0=0.0, kernel_mode=None))]
    fn new(family: &str, a: f64, b: f64, beta0: f64, kernel_mode: Option<&str>) -> PyResult<Self> {
        let mode = match kernel_mode {
            None if beta0 == 0.0 => KernelMode::ClosedForm,
            None | Some("numeric_quadrature") => KernelMode::NumericQuadrature,
            Some("closed_form") => KernelMode::ClosedForm,
            Some(other) => return Err(PyValueError::new_err(format!("unknown kernel mode '{other}'"))),
        };
        let cutoff = CutoffParams::new(beta0).map_err(py_err)?;
        let inner = PricingModel::new(mixing(family, a, b)?, cutoff, mode).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// European option value at time `t` with current log-return `y`.
    #[pyo3(signature = (s0, strike, rate, maturity, payoff="call", t=0.0, y=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn price(
        &self,
        s0: f64,
        strike: f64,
        rate: f64,
        maturity: f64,
        payoff: &str,
        t: f64,
        y: f64,
    ) -> PyResult<f64> {
        let opt = OptionSpec::new(s0, strike, rate, t, maturity, y).map_err(py_err)?;
        pricing::price_european(&opt, &self.inner, parse_payoff(payoff)?).map_err(py_err)
    }

    /// Call delta with respect to the spot.
    #[pyo3(signature = (s0, strike, rate, maturity, t=0.0, y=0.0))]
    fn hedge_ratio(&self, s0: f64, strike: f64, rate: f64, maturity: f64, t: f64, y: f64) -> PyResult<f64> {
        let opt = OptionSpec::new(s0, strike, rate, t, maturity, y).map_err(py_err)?;
        pricing::hedge_ratio(&opt, &self.inner).map_err(py_err)
    }

    /// Monte Carlo estimate; returns `(price, std_error)`.
    #[pyo3(signature = (s0, strike, rate, maturity, payoff="call", n_paths=1_000_000, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn monte_carlo(
        &self,
        py: Python<'_>,
        s0: f64,
        strike: f64,
        rate: f64,
        maturity: f64,
        payoff: &str,
        n_paths: usize,
        seed: u64,
    ) -> PyResult<(f64, f64)> {
        let opt = OptionSpec::new(s0, strike, rate, 0.0, maturity, 0.0).map_err(py_err)?;
        let payoff = parse_payoff(payoff)?;
        let e = py
            .detach(|| pricing::mc_price_oracle(&opt, &self.inner, payoff, n_paths, seed))
            .map_err(py_err)?;
        Ok((e.price, e.std_error))
    }
}

fn parse_payoff(p: &str) -> PyResult<Payoff> {
    match p {
        "call" => Ok(Payoff::Call),
        "put" => Ok(Payoff::Put),
        other => Err(PyValueError::new_err(format!("unknown payoff '{other}'"))),
    }
}

#[pyfunction]
fn black_scholes(s0: f64, strike: f64, rate: f64, sigma: f64, maturity: f64) -> PyResult<f64> {
    pricing::black_scholes_ref(s0, strike, rate, sigma, maturity).map_err(py_err)
}

/// `Γ_g(z, λ; v) = ∫₀^∞ (ξ+v)^(-λ) ξ^(z-1) e^(-ξ) dξ`.
#[pyfunction]
fn generalized_gamma(z: f64, lambda: f64, v: f64) -> PyResult<f64> {
    specfun::generalized_gamma(z, lambda, v, &QuadratureSpec::default()).map_err(py_err)
}

#[pymodule]
fn superstat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyReturnDistribution>()?;
    m.add_class::<PyFitResult>()?;
    m.add_class::<PyPricingModel>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(log_returns, m)?)?;
    m.add_function(wrap_pyfunction!(standardize, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(black_scholes, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_gamma, m)?)?;
    Ok(())
}
