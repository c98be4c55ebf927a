//! Python bindings: `import delrate`.
//!
//! Heavy computations release the GIL. Errors surface as `ValueError`
//! (bad arguments, malformed caches) or `OSError`.

use delrate_core::bounds::{self, BoundKind};
use delrate_core::channelsim::{self, BitString};
use delrate_core::walkdp::{self, WalkParams};
use delrate_core::{numerics, oracle, Error};
use num_bigint::BigUint;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for delrate_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn parse_kind(kind: &str) -> PyResult<BoundKind> {
    BoundKind::ALL
        .into_iter()
        .find(|k| k.name() == kind)
        .ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown bound kind `{kind}`; expected warmup, main, efficient or corollary"
            ))
        })
}

fn parse_bits(s: &str) -> PyResult<BitString> {
    s.parse().map_err(to_py)
}

/// A proven upper bound on the uniform-input rate with its additive terms.
#[pyclass(frozen, name = "BoundReport", module = "delrate")]
struct PyBoundReport(bounds::BoundReport);

#[pymethods]
impl PyBoundReport {
    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind.name()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn d(&self) -> f64 {
        self.0.d
    }

    #[getter]
    fn value(&self) -> f64 {
        self.0.value
    }

    #[getter]
    fn e_inf_upper(&self) -> f64 {
        self.0.e_inf_upper
    }

    #[getter]
    fn chosen_weight(&self) -> Option<usize> {
        self.0.chosen_weight
    }

    /// Additive terms in summation order.
    #[getter]
    fn components(&self) -> Vec<(String, f64)> {
        self.0
            .components
            .iter()
            .map(|c| (c.name.clone(), c.value))
            .collect()
    }

    fn compression_rate_lower(&self) -> f64 {
        self.0.compression_rate_lower()
    }

    fn __repr__(&self) -> String {
        format!(
            "BoundReport(kind='{}', n={}, d={}, value={})",
            self.0.kind, self.0.n, self.0.d, self.0.value
        )
    }
}

/// A Monte Carlo estimate of `E_n(d)` with its Hoeffding half-width.
#[pyclass(frozen, name = "SimEstimate", module = "delrate")]
struct PySimEstimate(channelsim::SimEstimate);

#[pymethods]
impl PySimEstimate {
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn d(&self) -> f64 {
        self.0.d
    }

    #[getter]
    fn samples(&self) -> usize {
        self.0.samples
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean
    }

    #[getter]
    fn half_width(&self) -> f64 {
        self.0.half_width
    }

    #[getter]
    fn confidence(&self) -> f64 {
        self.0.confidence
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn generator_id(&self) -> &str {
        &self.0.generator_id
    }

    #[getter]
    fn sample_variance(&self) -> f64 {
        self.0.sample_variance
    }

    /// Statistical `(lower, upper)` bounds on the uniform-input rate.
    fn sim_bounds(&self) -> (f64, f64) {
        self.0.sim_bounds()
    }

    fn __repr__(&self) -> String {
        format!(
            "SimEstimate(n={}, d={}, mean={}, half_width={})",
            self.0.n, self.0.d, self.0.mean, self.0.half_width
        )
    }
}

/// `u -> log2 Pi_n^u[u]` for `u = 0..=n`.
#[pyclass(frozen, name = "PiTable", module = "delrate")]
struct PyPiTable(walkdp::PiTable);

#[pymethods]
impl PyPiTable {
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    /// `log2 Pi_n^u[u]`; `-inf` for probability zero.
    fn get(&self, u: usize) -> PyResult<f64> {
        self.0
            .entries()
            .get(u)
            .map(|v| v.log2())
            .ok_or_else(|| PyValueError::new_err(format!("u = {u} exceeds n = {}", self.0.n())))
    }

    fn entries(&self) -> Vec<f64> {
        self.0.entries().iter().map(|v| v.log2()).collect()
    }

    fn to_cache_string(&self) -> String {
        self.0.to_cache_string()
    }

    #[staticmethod]
    fn from_cache_string(text: &str, n: usize) -> PyResult<Self> {
        walkdp::PiTable::from_cache_str(text, n)
            .py_err()
            .map(PyPiTable)
    }

    fn __len__(&self) -> usize {
        self.0.entries().len()
    }

    fn __repr__(&self) -> String {
        format!("PiTable(n={})", self.0.n())
    }
}

#[pyfunction]
fn entropy(p: f64) -> PyResult<f64> {
    numerics::entropy(p).py_err()
}

#[pyfunction]
fn kl_bernoulli(a: f64, b: f64) -> PyResult<f64> {
    Ok(numerics::kl_bernoulli(
        numerics::BernoulliPair::new(a, b).py_err()?,
    ))
}

#[pyfunction]
fn log_binomial(n: u64, u: u64) -> PyResult<f64> {
    numerics::log_binomial(n, u).py_err()
}

#[pyfunction]
fn convergence_shift(n: u64, d: f64) -> PyResult<f64> {
    numerics::convergence_shift(n, d).py_err()
}

#[pyfunction]
fn hoeffding_half_width(samples: usize, confidence: f64) -> PyResult<f64> {
    channelsim::hoeffding_half_width(samples, confidence).py_err()
}

/// `log2 P(D^alpha(X) = D^beta(X))` for uniform `X` of length `n`.
#[pyfunction]
fn agree_prob_log(n: usize, alpha: f64, beta: f64) -> PyResult<f64> {
    let params = WalkParams::new(n, alpha, beta).py_err()?;
    Ok(walkdp::agree_prob_log(&params).log2())
}

#[pyfunction]
fn pi_uu_log(py: Python<'_>, n: usize, ell: usize) -> PyResult<f64> {
    py.detach(|| walkdp::pi_uu_log(n, ell))
        .py_err()
        .map(|v| v.log2())
}

#[pyfunction]
fn pi_table(py: Python<'_>, n: usize) -> PyResult<PyPiTable> {
    py.detach(|| walkdp::pi_table(n)).py_err().map(PyPiTable)
}

#[pyfunction]
fn warmup_upper(py: Python<'_>, n: usize, d: f64) -> PyResult<PyBoundReport> {
    py.detach(|| bounds::warmup_upper(n, d))
        .py_err()
        .map(PyBoundReport)
}

/// Main bound; builds the table when none is passed.
#[pyfunction]
#[pyo3(signature = (n, d, table=None))]
fn main_upper(
    py: Python<'_>,
    n: usize,
    d: f64,
    table: Option<PyRef<'_, PyPiTable>>,
) -> PyResult<PyBoundReport> {
    let report = match table {
        Some(t) => {
            let t = &t.0;
            py.detach(|| bounds::main_upper(n, d, t))
        }
        None => py.detach(|| bounds::main_upper(n, d, &walkdp::pi_table(n)?)),
    };
    report.py_err().map(PyBoundReport)
}

#[pyfunction]
#[pyo3(signature = (n, d, grid_size=50, max_delta=1.0))]
fn efficient_upper(
    py: Python<'_>,
    n: usize,
    d: f64,
    grid_size: usize,
    max_delta: f64,
) -> PyResult<PyBoundReport> {
    let cfg = bounds::EfficientBoundConfig::new(grid_size, max_delta).py_err()?;
    py.detach(|| bounds::efficient_upper(n, d, &cfg))
        .py_err()
        .map(PyBoundReport)
}

/// Simplified bound at a fixed `delta`, or the best on the grid when omitted.
#[pyfunction]
#[pyo3(signature = (n, d, delta=None, grid_size=50, max_delta=1.0))]
fn corollary_upper(
    py: Python<'_>,
    n: usize,
    d: f64,
    delta: Option<f64>,
    grid_size: usize,
    max_delta: f64,
) -> PyResult<PyBoundReport> {
    let report = match delta {
        Some(delta) => py.detach(|| bounds::corollary_report(n, d, delta)),
        None => {
            let cfg = bounds::EfficientBoundConfig::new(grid_size, max_delta).py_err()?;
            py.detach(|| bounds::corollary_best(n, d, &cfg))
        }
    };
    report.py_err().map(PyBoundReport)
}

#[pyfunction]
fn en_prime_upper(n: usize, u: usize, pi_log2: f64) -> PyResult<f64> {
    bounds::en_prime_upper(n, u, delrate_core::LogValue::from_log2(pi_log2)).py_err()
}

/// Any bound by name: `warmup`, `main`, `efficient` or `corollary`.
#[pyfunction]
#[pyo3(signature = (kind, n, d, table=None))]
fn compute_bound(
    py: Python<'_>,
    kind: &str,
    n: usize,
    d: f64,
    table: Option<PyRef<'_, PyPiTable>>,
) -> PyResult<PyBoundReport> {
    let kind = parse_kind(kind)?;
    if kind == BoundKind::Main {
        return main_upper(py, n, d, table);
    }
    let cfg = bounds::EfficientBoundConfig::default();
    py.detach(|| bounds::compute(kind, n, d, None, &cfg))
        .py_err()
        .map(PyBoundReport)
}

/// `log2 |D(x, y)|` for bit strings given as text such as `"0110"`.
#[pyfunction]
fn count_subsequences_log(x: &str, y: &str) -> PyResult<f64> {
    let (x, y) = (parse_bits(x)?, parse_bits(y)?);
    channelsim::count_subsequences_log(&x, &y)
        .py_err()
        .map(|v| v.log2())
}

/// Exact count as a Python int.
#[pyfunction]
fn count_subsequences_exact(x: &str, y: &str) -> PyResult<BigUint> {
    let (x, y) = (parse_bits(x)?, parse_bits(y)?);
    channelsim::count_subsequences_exact(&x, &y).py_err()
}

#[pyfunction]
#[pyo3(signature = (n, d, samples, seed, confidence=0.99))]
fn estimate_en(
    py: Python<'_>,
    n: usize,
    d: f64,
    samples: usize,
    seed: u64,
    confidence: f64,
) -> PyResult<PySimEstimate> {
    py.detach(|| channelsim::estimate_en(n, d, samples, seed, confidence))
        .py_err()
        .map(PySimEstimate)
}

#[pyfunction]
fn exact_agree_prob(py: Python<'_>, n: usize, alpha: f64, beta: f64) -> PyResult<f64> {
    py.detach(|| oracle::exact_agree_prob(n, alpha, beta))
        .py_err()
}

#[pyfunction]
fn exact_pi(py: Python<'_>, n: usize, ell: usize, u: usize) -> PyResult<f64> {
    py.detach(|| oracle::exact_pi(n, ell, u)).py_err()
}

#[pyfunction]
fn exact_en(py: Python<'_>, n: usize, d: f64) -> PyResult<f64> {
    py.detach(|| oracle::exact_en(n, d)).py_err()
}

#[pyfunction]
fn exact_en_prime(py: Python<'_>, n: usize, u: usize) -> PyResult<f64> {
    py.detach(|| oracle::exact_en_prime(n, u)).py_err()
}

#[pyfunction]
fn exact_cond_entropy(py: Python<'_>, n: usize, k: usize) -> PyResult<f64> {
    py.detach(|| oracle::exact_cond_entropy(n, k)).py_err()
}

#[pyfunction]
fn cunif_from_einf(d: f64, e_inf: f64) -> f64 {
    bounds::cunif_from_einf(d, e_inf)
}

#[pyfunction]
fn einf_from_cunif(d: f64, c_unif: f64) -> f64 {
    bounds::einf_from_cunif(d, c_unif)
}

#[pymodule]
fn delrate(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBoundReport>()?;
    m.add_class::<PySimEstimate>()?;
    m.add_class::<PyPiTable>()?;
    m.add("GENERATOR_ID", channelsim::GENERATOR_ID)?;
    m.add("MAX_ORACLE_N", oracle::MAX_ORACLE_N)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(kl_bernoulli, m)?)?;
    m.add_function(wrap_pyfunction!(log_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_shift, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_half_width, m)?)?;
    m.add_function(wrap_pyfunction!(agree_prob_log, m)?)?;
    m.add_function(wrap_pyfunction!(pi_uu_log, m)?)?;
    m.add_function(wrap_pyfunction!(pi_table, m)?)?;
    m.add_function(wrap_pyfunction!(warmup_upper, m)?)?;
    m.add_function(wrap_pyfunction!(main_upper, m)?)?;
    m.add_function(wrap_pyfunction!(efficient_upper, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_upper, m)?)?;
    m.add_function(wrap_pyfunction!(en_prime_upper, m)?)?;
    m.add_function(wrap_pyfunction!(compute_bound, m)?)?;
    m.add_function(wrap_pyfunction!(count_subsequences_log, m)?)?;
    m.add_function(wrap_pyfunction!(count_subsequences_exact, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_en, m)?)?;
    m.add_function(wrap_pyfunction!(exact_agree_prob, m)?)?;
    m.add_function(wrap_pyfunction!(exact_pi, m)?)?;
    m.add_function(wrap_pyfunction!(exact_en, m)?)?;
    m.add_function(wrap_pyfunction!(exact_en_prime, m)?)?;
    m.add_function(wrap_pyfunction!(exact_cond_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(cunif_from_einf, m)?)?;
    m.add_function(wrap_pyfunction!(einf_from_cunif, m)?)?;
    Ok(())
}
