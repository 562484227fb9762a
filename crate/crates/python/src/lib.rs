//! Python bindings.

use cbitcl::measure::EsscherSpec;
use cbitcl::{self as core, CbitclError, ErrorKind};
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: CbitclError) -> PyErr {
    match e.kind() {
        ErrorKind::Numeric => PyArithmeticError::new_err(e.to_string()),
        ErrorKind::Domain | ErrorKind::Config => PyValueError::new_err(e.to_string()),
    }
}

/// A CBITCL model: branching process `X`, its integral `Y` and the time-changed Lévy process `Z`.
#[pyclass(name = "Model", frozen, from_py_object, module = "pycbitcl")]
#[derive(Clone)]
struct PyModel {
    inner: core::CbitclModel,
}

#[pymethods]
impl PyModel {
    /// Parses a TOML model description.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyModel { inner: core::parse_model(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyModel { inner: core::load_model(&path).map_err(to_py)? })
    }

    /// Built-in model by name.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        core::presets::by_name(name)
            .map(|inner| PyModel { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown preset `{name}`; available: {}", core::presets::NAMES.join(", "))))
    }

    #[staticmethod]
    fn heston(v0: f64, kappa: f64, theta: f64, xi: f64, rho: f64) -> PyResult<Self> {
        let inner = core::presets::heston(v0, kappa, theta, xi, rho);
        inner.validate().map_err(to_py)?;
        Ok(PyModel { inner })
    }

    #[staticmethod]
    fn black_scholes(variance: f64) -> PyResult<Self> {
        let inner = core::presets::black_scholes(variance);
        inner.validate().map_err(to_py)?;
        Ok(PyModel { inner })
    }

    fn to_toml(&self) -> String {
        core::model_to_toml(&self.inner)
    }

    fn hash(&self) -> String {
        core::model_hash(&self.inner)
    }

    #[getter]
    fn x0(&self) -> f64 {
        self.inner.x0
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    fn psi(&self, u: f64) -> PyResult<f64> {
        self.inner.psi(u).map_err(to_py)
    }

    fn phi(&self, u: f64) -> PyResult<f64> {
        self.inner.phi(u).map_err(to_py)
    }

    fn xi(&self, u: f64) -> PyResult<f64> {
        self.inner.xi(u).map_err(to_py)
    }

    /// Effective domains of the exponents.
    fn domain<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = self.inner.domain_info();
        let out = PyDict::new(py);
        out.set_item("psi", d.psi)?;
        out.set_item("phi", d.phi)?;
        out.set_item("x_upper", d.x_upper)?;
        out.set_item("x_upper_closed", d.x_upper_closed)?;
        out.set_item("z_lower", d.z_lower)?;
        out.set_item("z_lower_closed", d.z_lower_closed)?;
        out.set_item("z_upper", d.z_upper)?;
        out.set_item("z_upper_closed", d.z_upper_closed)?;
        Ok(out)
    }

    /// `E[exp(w1 X_t + w2 Y_t + w3 Z_t)]`.
    #[pyo3(signature = (t, w1 = Complex64::new(0.0, 0.0), w2 = Complex64::new(0.0, 0.0), w3 = Complex64::new(0.0, 0.0)))]
    fn char_fn(&self, t: f64, w1: Complex64, w2: Complex64, w3: Complex64) -> PyResult<Complex64> {
        core::char_fn_joint(&self.inner, t, w1, w2, w3, &core::SolverConfig::default()).map_err(to_py)
    }

    /// Explosion time of `E[exp(u1 X + u2 Y + u3 Z)]` as `(value, classification)`.
    #[pyo3(signature = (u1 = 0.0, u2 = 0.0, u3 = 0.0))]
    fn lifetime(&self, u1: f64, u2: f64, u3: f64) -> PyResult<(f64, String)> {
        let r = core::lifetime(&self.inner, u1, u2, u3).map_err(to_py)?;
        Ok((r.value, format!("{:?}", r.classification)))
    }

    fn chi(&self, u2: f64, u3: f64) -> PyResult<f64> {
        core::chi(&self.inner, u2, u3).map_err(to_py)
    }

    /// Undiscounted call prices on `exp(lambda Z_t + zeta (X_t - X0) - K)`.
    #[pyo3(signature = (t, strikes, zeta = 0.0, lambda_ = 1.0, damping = core::pricing::DEFAULT_DAMPING, tol = 1e-10))]
    fn price_calls(&self, t: f64, strikes: Vec<f64>, zeta: f64, lambda_: f64, damping: f64, tol: f64) -> PyResult<Vec<f64>> {
        let spec = core::LogPriceSpec::new(self.inner, zeta, lambda_).map_err(to_py)?;
        let cfg = core::PricingConfig { tol, ..Default::default() };
        strikes
            .iter()
            .map(|&k| core::price_call(&spec, t, k, damping, &cfg).map(|r| r.price).map_err(to_py))
            .collect()
    }

    /// Left and right implied-variance wing slopes at maturity `t`.
    #[pyo3(signature = (t, zeta = 0.0, lambda_ = 1.0))]
    fn wing_slopes(&self, t: f64, zeta: f64, lambda_: f64) -> PyResult<(f64, f64)> {
        core::wing_slopes(&self.inner, zeta, lambda_, t).map_err(to_py)
    }

    /// The model under the Esscher-type measure with weights `(zeta, lambda)`.
    fn esscher(&self, zeta: f64, lambda_: f64) -> PyResult<PyModel> {
        let spec = EsscherSpec::new(&self.inner, zeta, lambda_).map_err(to_py)?;
        Ok(PyModel { inner: core::esscher_transform(&self.inner, &spec).map_err(to_py)? })
    }

    fn is_exp_martingale(&self) -> bool {
        core::is_exp_martingale(&self.inner)
    }

    /// Simulated paths as a dict with `t` and per-path lists `X`, `Y`, `Z`.
    #[pyo3(signature = (horizon = 1.0, step = 1.0 / 256.0, n_paths = 1000, seed = 0, epsilon = 1e-3, method = "euler"))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        horizon: f64,
        step: f64,
        n_paths: usize,
        seed: u64,
        epsilon: f64,
        method: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = core::SimConfig { horizon, step, n_paths, seed, epsilon, ..Default::default() };
        let paths = match method {
            "euler" => py.detach(|| core::simulate_paths(&self.inner, &cfg)),
            "lamperti" => py.detach(|| core::simulate_lamperti(&self.inner, &cfg)),
            other => return Err(PyValueError::new_err(format!("unknown method `{other}`; use euler or lamperti"))),
        }
        .map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("t", paths.times)?;
        out.set_item("X", paths.x)?;
        out.set_item("Y", paths.y)?;
        out.set_item("Z", paths.z)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("Model(hash={})", &self.hash()[..12])
    }

    fn __eq__(&self, other: &PyModel) -> bool {
        self.inner == other.inner
    }
}

/// Black–Scholes call on a unit forward.
#[pyfunction]
fn black_scholes_call(strike: f64, t: f64, vol: f64) -> f64 {
    core::black_scholes_call(strike, t, vol)
}

#[pyfunction]
fn implied_vol(price: f64, strike: f64, t: f64) -> PyResult<f64> {
    core::implied_vol(price, strike, t).map_err(to_py)
}

#[pymodule]
fn pycbitcl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(black_scholes_call, m)?)?;
    m.add_function(wrap_pyfunction!(implied_vol, m)?)?;
    m.add("PRESETS", core::presets::NAMES.to_vec())?;
    Ok(())
}
