//! Python bindings: kernels, interpolation, sampling, adversarial curves,
//! packing estimates and the experiment runner.

use std::path::PathBuf;

use engine::adversary;
use engine::entropy::{self, CandidateConfig, RateFamily};
use engine::harness::{self, Command, Config, Format};
use engine::policies::{FirstPoint, LcbVariant, PolicyContext, PolicyKind};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(ego_bounds, EgoBoundsError, PyException);

fn err(e: engine::Error) -> PyErr {
    EgoBoundsError::new_err(e.to_string())
}

#[pyclass(name = "Kernel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKernel(engine::KernelSpec);

#[pymethods]
impl PyKernel {
    #[staticmethod]
    fn se(lengthscale: f64) -> PyResult<Self> {
        engine::KernelSpec::se(lengthscale)
            .map(PyKernel)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (nu, rho, variance = 1.0))]
    fn matern(nu: f64, rho: f64, variance: f64) -> PyResult<Self> {
        engine::KernelSpec::matern(nu, rho, variance)
            .map(PyKernel)
            .map_err(err)
    }

    #[staticmethod]
    fn quadratic() -> Self {
        PyKernel(engine::KernelSpec::quadratic())
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn __call__(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&x, &y).map_err(err)
    }

    fn gram(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let g = self.0.gram(&points).map_err(err)?;
        Ok((0..g.size()).map(|i| g.row(i).to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        format!("Kernel({:?})", self.0)
    }
}

#[pyclass(name = "Domain", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDomain(engine::BoxDomain);

#[pymethods]
impl PyDomain {
    #[new]
    fn new(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        engine::BoxDomain::new(lower, upper)
            .map(PyDomain)
            .map_err(err)
    }

    #[staticmethod]
    fn cube(dim: usize, lower: f64, upper: f64) -> PyResult<Self> {
        engine::BoxDomain::cube(dim, lower, upper)
            .map(PyDomain)
            .map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.0.lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.0.upper().to_vec()
    }

    fn __contains__(&self, x: Vec<f64>) -> bool {
        self.0.contains(&x)
    }

    fn __repr__(&self) -> String {
        format!(
            "Domain(lower={:?}, upper={:?})",
            self.0.lower(),
            self.0.upper()
        )
    }
}

#[pyclass(name = "RkhsFunction", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRkhsFunction(engine::RkhsFunction);

#[pymethods]
impl PyRkhsFunction {
    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&x).map_err(err)
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.0.norm()
    }

    #[getter]
    fn centers(&self) -> Vec<Vec<f64>> {
        self.0.centers().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    #[getter]
    fn kernel(&self) -> PyKernel {
        PyKernel(*self.0.kernel())
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        engine::RkhsFunction::from_json(text)
            .map(PyRkhsFunction)
            .map_err(err)
    }
}

#[pyclass(name = "Posterior", frozen)]
struct PyPosterior(engine::Posterior);

#[pymethods]
impl PyPosterior {
    /// Fit the noiseless interpolant; with `r`, also check the norm budget.
    #[new]
    #[pyo3(signature = (kernel, points, values, r = None))]
    fn new(
        kernel: &PyKernel,
        points: Vec<Vec<f64>>,
        values: Vec<f64>,
        r: Option<f64>,
    ) -> PyResult<Self> {
        let design = engine::Design::new(points, values).map_err(err)?;
        let post = match r {
            Some(r) => engine::Posterior::fit(kernel.0, design, r),
            None => engine::Posterior::fit_unbounded(kernel.0, design),
        };
        post.map(PyPosterior).map_err(err)
    }

    fn mean(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.mean(&x).map_err(err)
    }

    fn std(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.std(&x).map_err(err)
    }

    fn envelope(&self, r: f64, x: Vec<f64>) -> PyResult<(f64, f64)> {
        self.0.envelope(r, &x).map_err(err)
    }

    #[getter]
    fn norm_sq(&self) -> f64 {
        self.0.norm_sq()
    }

    #[getter]
    fn jitter_used(&self) -> f64 {
        self.0.jitter_used()
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.0.alpha().to_vec()
    }

    fn mean_function(&self) -> PyRkhsFunction {
        PyRkhsFunction(self.0.mean_function())
    }

    fn adversarial_value(&self, r: f64, x: Vec<f64>) -> PyResult<f64> {
        adversary::adversarial_value(&self.0, r, &x).map_err(err)
    }

    fn adversarial_witness(&self, r: f64, target: Vec<f64>) -> PyResult<PyRkhsFunction> {
        adversary::adversarial_witness(&self.0, r, &target)
            .map(PyRkhsFunction)
            .map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (kernel, domain, n_knots, r, seed, mode = "rescale"))]
fn sample_rkhs(
    kernel: &PyKernel,
    domain: &PyDomain,
    n_knots: usize,
    r: f64,
    seed: u64,
    mode: &str,
) -> PyResult<PyRkhsFunction> {
    let mode: engine::SampleMode = mode.parse().map_err(err)?;
    engine::interpolate::sample_rkhs(kernel.0, &domain.0, n_knots, r, seed, mode)
        .map(|s| PyRkhsFunction(s.function))
        .map_err(err)
}

fn policy_kind(name: &str, beta: f64) -> PyResult<PolicyKind> {
    Ok(match name {
        "lcb" => PolicyKind::Lcb {
            beta,
            variant: LcbVariant::Plain,
        },
        "lcb_certified" => PolicyKind::Lcb {
            beta,
            variant: LcbVariant::Certified,
        },
        "ei" => PolicyKind::Ei,
        "grid" => PolicyKind::Grid {
            points_per_dim: None,
        },
        "two_phase" => PolicyKind::TwoPhase,
        other => return Err(EgoBoundsError::new_err(format!("unknown policy '{other}'"))),
    })
}

/// Worst-case simple regret `R·max sigma_t` of a policy's zero sequence,
/// for `t = 0..=budget`, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (policy, kernel, domain, r, budget, beta = 1.0, first_point = None, points_per_dim = None))]
#[allow(clippy::too_many_arguments)]
fn adversarial_curve<'py>(
    py: Python<'py>,
    policy: &str,
    kernel: &PyKernel,
    domain: &PyDomain,
    r: f64,
    budget: usize,
    beta: f64,
    first_point: Option<Vec<f64>>,
    points_per_dim: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut ctx = PolicyContext::new(kernel.0, domain.0.clone(), r);
    if let Some(x) = first_point {
        ctx.first_point = FirstPoint::Fixed(x);
    }
    if let Some(n) = points_per_dim {
        ctx.search = engine::SearchConfig::with_resolution(n);
    }
    let search = ctx.search.clone();
    let built = policy_kind(policy, beta)?.build(ctx, budget).map_err(err)?;
    let curve = py
        .detach(|| {
            adversary::adversarial_regret_curve(
                built.as_ref(),
                budget,
                kernel.0,
                &domain.0,
                r,
                &search,
            )
        })
        .map_err(err)?;
    curve
        .records
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("t", c.t)?;
            d.set_item("adversarial_regret", c.adversarial_regret)?;
            d.set_item("argmax", c.argmax.clone())?;
            d.set_item("jitter_used", c.jitter_used)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn lower_bound_steps(log_covering: f64, r: f64, eps: f64) -> PyResult<usize> {
    adversary::lower_bound_steps(log_covering, r, eps).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (family, r, eps, d, nu = 0.0))]
fn rate_theoretical(family: &str, r: f64, eps: f64, d: usize, nu: f64) -> PyResult<f64> {
    let family: RateFamily = family.parse().map_err(err)?;
    entropy::rate_theoretical(family, r, eps, d, nu).map_err(err)
}

/// Greedy packing counts at `8·eps` over candidate ball functions.
#[pyfunction]
#[pyo3(signature = (kernel, domain, r, eps, seed = 0, count = 200))]
fn entropy_report<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    domain: &PyDomain,
    r: f64,
    eps: Vec<f64>,
    seed: u64,
    count: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = CandidateConfig {
        count,
        ..Default::default()
    };
    let report = py
        .detach(|| entropy::entropy_report(kernel.0, &domain.0, r, &eps, &config, seed))
        .map_err(err)?;
    report
        .rows
        .iter()
        .map(|row| {
            let d = PyDict::new(py);
            d.set_item("eps", row.eps)?;
            d.set_item("packing_count", row.packing_count)?;
            d.set_item("log_packing", row.log_packing)?;
            d.set_item("lower_bound_steps", row.lower_bound_steps)?;
            Ok(d)
        })
        .collect()
}

/// Run a CLI experiment in-process; returns the written file paths.
#[pyfunction]
#[pyo3(signature = (command, out_dir, config = "", format = "csv"))]
fn run_experiment(
    py: Python<'_>,
    command: &str,
    out_dir: PathBuf,
    config: &str,
    format: &str,
) -> PyResult<Vec<String>> {
    let command: Command = command.parse().map_err(err)?;
    let format: Format = format.parse().map_err(err)?;
    let config = Config::parse(config).map_err(err)?;
    let manifest = py
        .detach(|| harness::run_to_dir(command, &config, format, &out_dir))
        .map_err(err)?;
    Ok(manifest
        .files
        .iter()
        .map(|f| out_dir.join(&f.name).to_string_lossy().into_owned())
        .chain(std::iter::once(
            out_dir
                .join(harness::output::MANIFEST_NAME)
                .to_string_lossy()
                .into_owned(),
        ))
        .collect())
}

#[pymodule]
fn ego_bounds(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EgoBoundsError", m.py().get_type::<EgoBoundsError>())?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyDomain>()?;
    m.add_class::<PyRkhsFunction>()?;
    m.add_class::<PyPosterior>()?;
    m.add_function(wrap_pyfunction!(sample_rkhs, m)?)?;
    m.add_function(wrap_pyfunction!(adversarial_curve, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_steps, m)?)?;
    m.add_function(wrap_pyfunction!(rate_theoretical, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_report, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
