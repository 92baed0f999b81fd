//! Python bindings: configuration, problem preparation, runs, tables, fault models and cost budgets.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use schwarz_lab::cost;
use schwarz_lab::experiment::{self, ExperimentConfig, Prepared};
use schwarz_lab::faults;
use schwarz_lab::iteration::RunReport;

fn err(e: schwarz_lab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Experiment configuration; defaults reproduce the reference setup.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (toml = None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(t) => ExperimentConfig::from_toml(t).map_err(err)?,
            None => ExperimentConfig::default(),
        };
        Ok(Self { inner })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    fn __repr__(&self) -> String {
        format!("Config(hash={})", self.inner.hash())
    }
}

/// Assembled problem and splitting for one configuration.
#[pyclass(name = "Problem")]
struct PyProblem {
    cfg: ExperimentConfig,
    prep: Prepared,
}

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (config = None))]
    fn new(config: Option<PyConfig>) -> PyResult<Self> {
        let cfg = config.map(|c| c.inner).unwrap_or_default();
        let prep = experiment::prepare(&cfg).map_err(err)?;
        Ok(Self { cfg, prep })
    }

    /// Number of subdomains (the coarse space is index 0 on top).
    #[getter]
    fn n(&self) -> usize {
        self.prep.splitting.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.prep.splitting.dim()
    }

    fn summary(&self) -> String {
        self.prep.splitting.summary().to_text()
    }

    /// Lanczos estimates `(lambda_min, lambda_max, kappa)`.
    fn spectrum(&self) -> PyResult<(f64, f64, f64)> {
        let b = experiment::spectrum(&self.prep, &self.cfg).map_err(err)?;
        Ok((b.lambda_min_est, b.lambda_max_est, b.kappa_est))
    }

    fn apply_p(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.prep.splitting.apply_p(&x).map_err(err)
    }

    /// Fault trace for `seed` in replayable text form, or None without faults.
    #[pyo3(signature = (seed = None))]
    fn scenario(&self, seed: Option<u64>) -> PyResult<Option<String>> {
        let sc = experiment::scenario(&self.prep, &self.cfg, seed.unwrap_or(self.cfg.seed)).map_err(err)?;
        Ok(sc.map(|s| s.to_text()))
    }

    /// One run; `trace` replays a saved scenario.
    #[pyo3(signature = (seed = None, trace = None))]
    fn run(&self, seed: Option<u64>, trace: Option<&str>) -> PyResult<PyRunReport> {
        let seed = seed.unwrap_or(self.cfg.seed);
        let sc = match trace {
            Some(t) => Some(faults::FaultScenario::from_text(t, &self.prep.splitting).map_err(err)?),
            None => experiment::scenario(&self.prep, &self.cfg, seed).map_err(err)?,
        };
        let rep = experiment::run_with(&self.prep, &self.cfg, seed, sc, None).map_err(err)?;
        Ok(PyRunReport { inner: rep, hash: self.cfg.hash() })
    }

    /// Constant-rate master-slave table.
    #[pyo3(signature = (seed = None, repeats = 1))]
    fn table1(&self, seed: Option<u64>, repeats: usize) -> PyResult<PyTable> {
        let t = experiment::table1(&self.prep, &self.cfg, seed.unwrap_or(self.cfg.seed), repeats).map_err(err)?;
        Ok(PyTable { inner: t, hash: self.cfg.hash() })
    }

    /// Weibull redundancy table.
    #[pyo3(signature = (seed = None, repeats = 1))]
    fn table2(&self, seed: Option<u64>, repeats: usize) -> PyResult<PyTable> {
        let cfg = experiment::table2_defaults(self.cfg.clone());
        let t = experiment::table2(&self.prep, &cfg, seed.unwrap_or(cfg.seed), repeats).map_err(err)?;
        Ok(PyTable { inner: t, hash: cfg.hash() })
    }
}

#[pyclass(name = "RunReport")]
struct PyRunReport {
    inner: RunReport,
    hash: String,
}

#[pymethods]
impl PyRunReport {
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged()
    }

    #[getter]
    fn reason(&self) -> String {
        self.inner.reason.to_string()
    }

    /// Per-step `(m, p, f, xi, epsilon)`.
    #[getter]
    fn records(&self) -> Vec<(usize, usize, usize, f64, f64)> {
        self.inner.records.iter().map(|r| (r.m, r.p, r.f, r.xi, r.epsilon)).collect()
    }

    #[getter]
    fn solution(&self) -> Vec<f64> {
        self.inner.solution.clone()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv(&self.hash)
    }

    fn __repr__(&self) -> String {
        format!("RunReport({} after {} iterations)", self.inner.reason, self.inner.iterations)
    }
}

#[pyclass(name = "Table")]
struct PyTable {
    inner: experiment::Table,
    hash: String,
}

#[pymethods]
impl PyTable {
    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.columns.clone()
    }

    /// `(label, [mean iteration count per column])`.
    #[getter]
    fn rows(&self) -> Vec<(String, Vec<f64>)> {
        self.inner.rows.iter().map(|(l, cells)| (l.clone(), cells.iter().map(|c| c.mean()).collect())).collect()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv(&self.hash)
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }
}

#[pyclass(name = "Weibull", from_py_object)]
#[derive(Clone)]
struct PyWeibull {
    inner: faults::WeibullParams,
}

#[pymethods]
impl PyWeibull {
    #[new]
    fn new(shape: f64, scale: f64) -> PyResult<Self> {
        Ok(Self { inner: faults::WeibullParams::new(shape, scale).map_err(err)? })
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn cdf(&self, t: f64) -> f64 {
        self.inner.cdf(t)
    }

    /// Inverse survival transform of a uniform `u` in (0, 1).
    fn transform(&self, u: f64) -> f64 {
        self.inner.transform(u)
    }
}

/// Down-node count per cycle and realized rate for `horizon` cycles of independent Weibull up/down processes.
#[pyfunction]
fn down_counts(
    n: usize,
    arrival: PyWeibull,
    repair: PyWeibull,
    horizon: usize,
    seed: u64,
) -> PyResult<(Vec<usize>, f64)> {
    let s = faults::generate_schedules(n, arrival.inner, repair.inner, horizon, seed).map_err(err)?;
    Ok(((0..horizon).map(|m| s.down_count(m)).collect(), s.realized_rate))
}

/// `(xi, reduction factor)` for per-part executed counts of a partition of `0..=n`.
#[pyfunction]
fn partition_rate_bound(
    n: usize,
    parts: Vec<Vec<usize>>,
    executed: Vec<usize>,
    lambda_max: f64,
    kappa: f64,
) -> PyResult<(f64, f64)> {
    let rates = faults::PartitionRates::new(n, parts, executed).map_err(err)?;
    faults::partition_rate_bound(&rates, lambda_max, kappa).map_err(err)
}

#[pyfunction]
fn multi_fault_rates(n: usize, l: usize, parts: usize, new_faults: usize) -> PyResult<(f64, f64)> {
    faults::multi_fault_rates(n, l, parts, new_faults).map_err(err)
}

/// Per-cycle budgets `{architecture: time}`; keyword names follow the constants file.
#[pyfunction]
#[pyo3(signature = (c_s = 10.0, c_u = 1.0, c_0c = 1.0, c_c = 1.0, m = 400.0, n = 400.0, l_bar = 8.0, servers = 20.0))]
#[allow(clippy::too_many_arguments)]
fn cycle_times(
    c_s: f64,
    c_u: f64,
    c_0c: f64,
    c_c: f64,
    m: f64,
    n: f64,
    l_bar: f64,
    servers: f64,
) -> PyResult<Vec<(String, f64)>> {
    let c = cost::CostConstants { c_s, c_u, c_0c, c_c, m, n, l_bar, servers };
    c.validate().map_err(err)?;
    Ok(vec![
        ("master-slave".into(), cost::cycle_time_master_slave(&c)),
        ("local".into(), cost::cycle_time_local(&c)),
        ("local-doubled".into(), cost::cycle_time_local_doubled(&c)),
        ("server-client".into(), cost::cycle_time_server_client(&c).map_err(err)?),
    ])
}

/// Dense-oracle bound checks as `(name, passed, detail)`.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn verify(seed: u64) -> PyResult<Vec<(String, bool, String)>> {
    let checks = schwarz_lab::verify::run_all(seed).map_err(err)?;
    Ok(checks.into_iter().map(|c| (c.name, c.passed, c.detail)).collect())
}

#[pymodule]
fn schwarz_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyRunReport>()?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyWeibull>()?;
    m.add_function(wrap_pyfunction!(down_counts, m)?)?;
    m.add_function(wrap_pyfunction!(partition_rate_bound, m)?)?;
    m.add_function(wrap_pyfunction!(multi_fault_rates, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_times, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
