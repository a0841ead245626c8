//! Python bindings for the BSDE laboratory.

use lab::experiment::TerminalSpec;
use lab::{
    BsdeSolution, BrownianPaths, BrownianProbe, Estimator, ExperimentConfig, GConfig, LabError, LsmcConfig,
    QuotientConfig, RunOptions, Scenario, TerminalCondition, TimeGrid, TreeSolution,
};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn err(e: LabError) -> PyErr {
    match e {
        LabError::NumericalFailure { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vector(z: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    match z.extract::<f64>() {
        Ok(v) => Ok(vec![v]),
        Err(_) => z.extract::<Vec<f64>>(),
    }
}

/// Catalog driver built from a label such as `kappa_abs_z(0.5)`.
#[pyclass(name = "Generator", module = "bsde_lab", frozen)]
struct PyGenerator {
    inner: lab::Generator,
}

#[pymethods]
impl PyGenerator {
    #[new]
    #[pyo3(signature = (label, dim = 1))]
    fn new(label: &str, dim: usize) -> PyResult<Self> {
        let spec = lab::GeneratorSpec::parse(label).map_err(err)?;
        Ok(PyGenerator { inner: spec.build(dim).map_err(err)? })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    #[getter]
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn flags<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let f = self.inner.flags();
        let d = PyDict::new(py);
        d.set_item("independent_of_y", f.independent_of_y)?;
        d.set_item("positively_homogeneous", f.positively_homogeneous)?;
        d.set_item("subadditive", f.subadditive)?;
        d.set_item("convex_in_z", f.convex_in_z)?;
        d.set_item("satisfies_a5", f.satisfies_a5)?;
        Ok(d)
    }

    /// `g(t, y, z)`; `z` is a float or a sequence of length `dim`.
    fn __call__(&self, t: f64, y: f64, z: &Bound<'_, PyAny>) -> PyResult<f64> {
        let z = vector(z)?;
        if z.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("z needs {} component(s)", self.inner.dim())));
        }
        Ok(self.inner.eval(t, y, &z))
    }

    fn __repr__(&self) -> String {
        format!("Generator('{}')", self.inner.label())
    }
}

/// Terminal condition built from a label such as `affine(0,1)` or `cosine`.
#[pyclass(name = "Terminal", module = "bsde_lab", frozen)]
struct PyTerminal {
    inner: TerminalCondition,
}

#[pymethods]
impl PyTerminal {
    #[new]
    fn new(label: &str) -> PyResult<Self> {
        Ok(PyTerminal { inner: TerminalSpec::parse(label).map_err(err)?.build() })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn scaled(&self, alpha: f64) -> Self {
        PyTerminal { inner: self.inner.scaled(alpha) }
    }

    fn shifted(&self, c: f64) -> Self {
        PyTerminal { inner: self.inner.shifted(c) }
    }

    fn __repr__(&self) -> String {
        format!("Terminal('{}')", self.inner.label())
    }
}

/// Simulated Brownian paths on a uniform grid.
#[pyclass(name = "Scenario", module = "bsde_lab", frozen)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (horizon, steps, paths, seed = 0, dim = 1))]
    fn new(py: Python<'_>, horizon: f64, steps: usize, paths: usize, seed: u64, dim: usize) -> PyResult<Self> {
        let grid = TimeGrid::new(horizon, steps).map_err(err)?;
        let paths = py.detach(|| BrownianPaths::simulate(grid, dim, paths, seed)).map_err(err)?;
        Ok(PyScenario { inner: Scenario::brownian(paths) })
    }

    #[getter]
    fn paths(&self) -> usize {
        self.inner.paths()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.grid().steps()
    }

    fn times(&self) -> Vec<f64> {
        self.inner.grid().nodes()
    }

    /// `W` at node `n` on every path (first component).
    fn w(&self, n: usize) -> PyResult<Vec<f64>> {
        if n > self.inner.grid().steps() {
            return Err(PyValueError::new_err(format!("node {n} is past the horizon")));
        }
        Ok((0..self.inner.paths()).map(|m| self.inner.w(m, n)[0]).collect())
    }
}

/// Pathwise solution `(Y, Z)` of a simulated BSDE.
#[pyclass(name = "Solution", module = "bsde_lab", frozen)]
struct PySolution {
    inner: BsdeSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn y0(&self) -> f64 {
        self.inner.y0()
    }

    #[getter]
    fn y0_se(&self) -> f64 {
        self.inner.y0_se()
    }

    #[getter]
    fn solver(&self) -> String {
        self.inner.tag().to_string()
    }

    fn y(&self, n: usize) -> PyResult<Vec<f64>> {
        self.check(n)?;
        Ok(self.inner.y_node(n))
    }

    fn z(&self, n: usize) -> PyResult<Vec<f64>> {
        self.check(n)?;
        Ok(self.inner.z_node(n))
    }
}

impl PySolution {
    fn check(&self, n: usize) -> PyResult<()> {
        if n > self.inner.grid().steps() {
            return Err(PyValueError::new_err(format!("node {n} is past the horizon")));
        }
        Ok(())
    }
}

/// Values of the recombining lattice, level by level.
#[pyclass(name = "Lattice", module = "bsde_lab", frozen)]
struct PyLattice {
    inner: TreeSolution,
}

#[pymethods]
impl PyLattice {
    #[getter]
    fn y0(&self) -> f64 {
        self.inner.y0()
    }

    fn y(&self) -> Vec<Vec<f64>> {
        self.inner.y.clone()
    }

    fn z(&self) -> Vec<Vec<f64>> {
        self.inner.z.clone()
    }
}

fn estimator(name: &str) -> PyResult<Estimator> {
    match name {
        "control_variate" | "cv" => Ok(Estimator::ControlVariate),
        "plain" => Ok(Estimator::Plain),
        other => Err(PyValueError::new_err(format!("unknown estimator `{other}`"))),
    }
}

/// Regression Monte Carlo solve.
#[pyfunction]
#[pyo3(signature = (generator, terminal, scenario, degree = 2, picard_iters = 3, estimator = "control_variate"))]
fn solve_lsmc(
    py: Python<'_>,
    generator: &PyGenerator,
    terminal: &PyTerminal,
    scenario: &PyScenario,
    degree: usize,
    picard_iters: usize,
    estimator: &str,
) -> PyResult<PySolution> {
    let cfg = LsmcConfig { degree, picard_iters, estimator: self::estimator(estimator)? };
    let sol = py
        .detach(|| lab::solve_lsmc(&generator.inner, &terminal.inner, &scenario.inner, &cfg))
        .map_err(err)?;
    Ok(PySolution { inner: sol })
}

/// Binomial lattice solve with at most 24 steps.
#[pyfunction]
fn solve_tree(generator: &PyGenerator, terminal: &PyTerminal, horizon: f64, steps: usize) -> PyResult<PyLattice> {
    Ok(PyLattice { inner: lab::solve_tree(&generator.inner, &terminal.inner, horizon, steps).map_err(err)? })
}

/// `(Y_t, Z_t)` for `g = a·y + b·z + c`, `ξ = α + β·W_T`, `τ = T − t`, `W_t = w`.
#[pyfunction]
fn closed_form(a: f64, b: f64, c: f64, alpha: f64, beta: f64, tau: f64, w: f64) -> (f64, f64) {
    lab::closed_form_value(a, b, c, alpha, beta, tau, w)
}

/// `E_g[ξ]` and its standard error; raises for drivers failing A5.
#[pyfunction]
fn g_expectation(py: Python<'_>, generator: &PyGenerator, terminal: &PyTerminal, scenario: &PyScenario) -> PyResult<(f64, f64)> {
    let e = py
        .detach(|| lab::g_expectation(&generator.inner, &terminal.inner, &scenario.inner, &GConfig::default()))
        .map_err(err)?;
    Ok((e.value(), e.se()))
}

/// Difference quotients `D_ε` of the driver at `(t, y, z)` along an `ε` ladder.
#[pyfunction]
#[pyo3(signature = (generator, t, y, z, epsilons = None, steps = 80, paths = 16384, seed = 0, analytic = false))]
#[allow(clippy::too_many_arguments)]
fn difference_quotient<'py>(
    py: Python<'py>,
    generator: &PyGenerator,
    t: f64,
    y: f64,
    z: &Bound<'py, PyAny>,
    epsilons: Option<Vec<f64>>,
    steps: usize,
    paths: usize,
    seed: u64,
    analytic: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let probe = BrownianProbe {
        t,
        y,
        z: vector(z)?,
        epsilons: epsilons.unwrap_or_else(|| lab::DEFAULT_EPSILONS.to_vec()),
    };
    let cfg = QuotientConfig {
        grid: TimeGrid::new(1.0, steps).map_err(err)?,
        paths,
        seed,
        analytic,
        ..Default::default()
    };
    let r = py
        .detach(|| lab::difference_quotient_brownian(&generator.inner, &probe, &cfg))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("target", r.target)?;
    d.set_item("final_error", r.final_error)?;
    d.set_item("monotone", r.monotone)?;
    let rows = PyList::empty(py);
    for row in &r.rows {
        let e = PyDict::new(py);
        e.set_item("epsilon", row.epsilon)?;
        e.set_item("estimate", row.estimate)?;
        e.set_item("l2_error", row.l2_error)?;
        e.set_item("se", row.se)?;
        e.set_item("solver", row.solver.to_string())?;
        rows.append(e)?;
    }
    d.set_item("rows", rows)?;
    Ok(d)
}

/// Runs a config given as text; returns the verdicts and the results table.
#[pyfunction]
#[pyo3(signature = (text, seed = None, tolerance_scale = 1.0))]
fn run_config<'py>(py: Python<'py>, text: &str, seed: Option<u64>, tolerance_scale: f64) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig::parse(text).map_err(err)?;
    let opts = RunOptions { seed, tolerance_scale };
    let bundle = py.detach(|| lab::run_experiment(&cfg, text, &opts)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("pass", bundle.all_pass())?;
    let verdicts = PyList::empty(py);
    for v in &bundle.verdicts {
        let e = PyDict::new(py);
        e.set_item("id", &v.id)?;
        e.set_item("label", &v.label)?;
        e.set_item("observed", v.observed)?;
        e.set_item("tolerance", v.tolerance)?;
        e.set_item("pass", v.pass)?;
        e.set_item("detail", &v.detail)?;
        verdicts.append(e)?;
    }
    d.set_item("verdicts", verdicts)?;
    d.set_item("results_csv", bundle.results.to_csv().map_err(err)?)?;
    Ok(d)
}

/// Text listing of the built-in catalog.
#[pyfunction]
fn catalog() -> String {
    lab::catalog_listing()
}

#[pymodule]
#[pyo3(name = "bsde_lab")]
fn bsde_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGenerator>()?;
    m.add_class::<PyTerminal>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyLattice>()?;
    m.add_function(wrap_pyfunction!(solve_lsmc, m)?)?;
    m.add_function(wrap_pyfunction!(solve_tree, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(g_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(difference_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
