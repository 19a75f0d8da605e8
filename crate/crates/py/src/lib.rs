//! Python bindings: instances, solutions, solver runs, the exact oracle and
//! LP export.

use hhcr_core::lp::{export_original, export_rescheduling};
use hhcr_core::memetic::prepare;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn err(e: hhcr_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Instance", module = "hhcr", frozen)]
pub struct PyInstance {
    inner: hhcr_core::Instance,
}

#[pymethods]
impl PyInstance {
    /// Depot at `depot`; `existing` and `new` are `(x, y, payment)` tuples.
    #[new]
    #[pyo3(signature = (depot, existing, new, rejection_cost=None))]
    fn new(
        depot: (f64, f64),
        existing: Vec<(f64, f64, f64)>,
        new: Vec<(f64, f64, f64)>,
        rejection_cost: Option<f64>,
    ) -> PyResult<Self> {
        let inner = hhcr_core::Instance::new(depot, &existing, &new, rejection_cost).map_err(err)?;
        Ok(PyInstance { inner })
    }

    /// Parses OP benchmark text.
    #[staticmethod]
    #[pyo3(signature = (text, n_existing, n_new, rejection_cost=None))]
    fn parse(text: &str, n_existing: usize, n_new: usize, rejection_cost: Option<f64>) -> PyResult<Self> {
        let inner = hhcr_core::Instance::parse(text, n_existing, n_new, rejection_cost).map_err(err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, n_existing, n_new, rejection_cost=None))]
    fn load(path: &str, n_existing: usize, n_new: usize, rejection_cost: Option<f64>) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Self::parse(&text, n_existing, n_new, rejection_cost)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn n_existing(&self) -> usize {
        self.inner.n_existing()
    }

    #[getter]
    fn n_new(&self) -> usize {
        self.inner.n_new()
    }

    #[getter]
    fn rejection_cost(&self) -> f64 {
        self.inner.rejection_cost()
    }

    /// `(x, y, payment, kind)` per node, depot first.
    fn nodes(&self) -> Vec<(f64, f64, f64, String)> {
        self.inner
            .nodes()
            .iter()
            .map(|n| (n.x, n.y, n.payment, format!("{:?}", n.kind).to_lowercase()))
            .collect()
    }

    fn dist(&self, i: usize, j: usize) -> PyResult<f64> {
        if i >= self.inner.len() || j >= self.inner.len() {
            return Err(PyValueError::new_err("node id out of range"));
        }
        Ok(self.inner.dist(i, j))
    }

    fn average_path_length(&self) -> f64 {
        self.inner.average_path_length()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n_existing={}, n_new={}, rejection_cost={})",
            self.inner.n_existing(),
            self.inner.n_new(),
            self.inner.rejection_cost()
        )
    }
}

#[pyclass(name = "Solution", module = "hhcr", frozen)]
pub struct PySolution {
    inner: hhcr_core::Solution,
}

#[pymethods]
impl PySolution {
    /// Builds a solution from a depot-to-depot route; unvisited new
    /// customers count as rejected.
    #[new]
    fn new(instance: &PyInstance, route: Vec<usize>) -> PyResult<Self> {
        let inner = hhcr_core::Solution::from_route(&instance.inner, route).map_err(err)?;
        Ok(PySolution { inner })
    }

    #[staticmethod]
    fn parse_line(instance: &PyInstance, line: &str) -> PyResult<Self> {
        let inner = hhcr_core::Solution::parse_line(&instance.inner, line).map_err(err)?;
        Ok(PySolution { inner })
    }

    #[getter]
    fn route(&self) -> Vec<usize> {
        self.inner.route().to_vec()
    }

    #[getter]
    fn rejected(&self) -> Vec<usize> {
        self.inner.rejected().to_vec()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.inner.length()
    }

    fn arrival(&self, node: usize) -> Option<f64> {
        self.inner.arrival(node)
    }

    fn distance(&self, other: &PySolution) -> PyResult<f64> {
        hhcr_core::solution_distance(&self.inner, &other.inner).map_err(err)
    }

    fn to_line(&self) -> String {
        self.inner.to_line()
    }

    fn __str__(&self) -> String {
        self.inner.to_line()
    }

    fn __repr__(&self) -> String {
        format!("Solution({})", self.inner.to_line())
    }
}

#[pyclass(name = "Config", module = "hhcr")]
#[derive(Default)]
pub struct PyConfig {
    inner: hhcr_core::SolverConfig,
}

#[pymethods]
impl PyConfig {
    /// Keyword arguments use the config-file keys, e.g.
    /// `Config(generations=2, lambda_=0.5)`.
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut cfg = PyConfig::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                cfg.set(key.trim_end_matches('_'), &v)?;
            }
        }
        cfg.inner.validate().map_err(err)?;
        Ok(cfg)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyConfig {
            inner: hhcr_core::SolverConfig::from_text(text).map_err(err)?,
        })
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        let text = value.str()?.to_string();
        self.inner.set(key, &text).map_err(err)
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }

    #[getter(lambda_)]
    fn lambda(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn population_size(&self) -> usize {
        self.inner.population_size
    }

    #[getter]
    fn generations(&self) -> usize {
        self.inner.generations
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "Scenario", module = "hhcr", frozen)]
pub struct PyScenario {
    inner: hhcr_core::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Baseline tour and limits for `instance` under `mu` and `lambda_`.
    #[new]
    #[pyo3(signature = (instance, mu=1.0, lambda_=0.5))]
    fn new(instance: &PyInstance, mu: f64, lambda_: f64) -> PyResult<Self> {
        let inner =
            hhcr_core::Scenario::prepare(instance.inner.clone(), mu, lambda_, hhcr_core::TspMode::Auto).map_err(err)?;
        Ok(PyScenario { inner })
    }

    #[getter]
    fn t_max(&self) -> f64 {
        self.inner.limits.t_max
    }

    #[getter]
    fn disruption_cap(&self) -> f64 {
        self.inner.limits.disruption_cap
    }

    #[getter]
    fn baseline_route(&self) -> Vec<usize> {
        self.inner.baseline.route().to_vec()
    }

    #[getter]
    fn baseline_length(&self) -> f64 {
        self.inner.baseline.length()
    }

    fn evaluate(&self, route: Vec<usize>) -> PyResult<PySolution> {
        Ok(PySolution {
            inner: self.inner.evaluate(route).map_err(err)?,
        })
    }

    fn is_feasible(&self, solution: &PySolution) -> bool {
        self.inner.is_feasible(&solution.inner)
    }

    /// `(ex1, ex2, violators)`: budget excess, payment of late existing
    /// customers and their count.
    fn violation(&self, solution: &PySolution) -> (f64, f64, usize) {
        let v = self.inner.measure(&solution.inner);
        (v.ex1, v.ex2, v.violators)
    }

    fn seed_solution(&self) -> PySolution {
        PySolution {
            inner: self.inner.seed_solution(),
        }
    }
}

#[pyclass(name = "RunReport", module = "hhcr", frozen)]
pub struct PyRunReport {
    inner: hhcr_core::RunReport,
}

#[pymethods]
impl PyRunReport {
    #[getter]
    fn best(&self) -> PySolution {
        PySolution {
            inner: self.inner.best.clone(),
        }
    }

    #[getter]
    fn best_obj(&self) -> f64 {
        self.inner.best_obj()
    }

    #[getter]
    fn avg_obj_trace(&self) -> Vec<f64> {
        self.inner.avg_obj_trace.clone()
    }

    #[getter]
    fn time_s(&self) -> f64 {
        self.inner.time_s
    }

    #[getter]
    fn generations(&self) -> usize {
        self.inner.generations
    }

    fn __repr__(&self) -> String {
        format!(
            "RunReport(best_obj={}, generations={})",
            self.inner.best_obj(),
            self.inner.generations
        )
    }
}

fn config_or_default(config: Option<&PyConfig>) -> hhcr_core::SolverConfig {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

/// Runs one algorithm (`ma2`, `alns`, `ts` or `ma1`) with the given seed.
#[pyfunction]
#[pyo3(signature = (instance, config=None, seed=42, algo="ma2"))]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    config: Option<&PyConfig>,
    seed: u64,
    algo: &str,
) -> PyResult<PyRunReport> {
    let cfg = config_or_default(config);
    let algo: hhcr_core::Algorithm = algo.parse().map_err(err)?;
    let inst = instance.inner.clone();
    let report = py
        .detach(move || {
            let sc = prepare(&inst, &cfg)?;
            hhcr_core::run_algorithm(&sc, algo, &cfg, seed)
        })
        .map_err(err)?;
    Ok(PyRunReport { inner: report })
}

/// Proven optimum, or `None` when nothing is feasible.
#[pyfunction]
#[pyo3(signature = (instance, config=None))]
fn solve_exact(py: Python<'_>, instance: &PyInstance, config: Option<&PyConfig>) -> PyResult<Option<PySolution>> {
    let cfg = config_or_default(config);
    let inst = instance.inner.clone();
    let best = py
        .detach(move || {
            let sc = prepare(&inst, &cfg)?;
            hhcr_core::solve_exact(&sc).map(|r| r.best)
        })
        .map_err(err)?;
    Ok(best.map(|inner| PySolution { inner }))
}

/// `(original, rescheduling)` models in LP format.
#[pyfunction]
#[pyo3(signature = (instance, config=None))]
fn export_lp(instance: &PyInstance, config: Option<&PyConfig>) -> PyResult<(String, String)> {
    let cfg = config_or_default(config);
    let sc = prepare(&instance.inner, &cfg).map_err(err)?;
    let original = export_original(&sc.inst).map_err(err)?;
    let resched = export_rescheduling(&sc.inst, &sc.baseline, &sc.limits).map_err(err)?;
    Ok((original, resched))
}

#[pyfunction]
fn gap(exact_obj: f64, heuristic_obj: f64) -> PyResult<f64> {
    hhcr_core::lp::gap(exact_obj, heuristic_obj).map_err(err)
}

#[pymodule]
fn hhcr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRunReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_exact, m)?)?;
    m.add_function(wrap_pyfunction!(export_lp, m)?)?;
    m.add_function(wrap_pyfunction!(gap, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
