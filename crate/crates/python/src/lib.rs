//! Python bindings: networks, configurations, the solver, baselines and
//! measures.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use multirank::baselines::{preset_configuration, preset_rankings, solve_with_matrices, BaselinePreset, PresetKind, DEFAULT_DAMPING};
use multirank::configurations::{config_count, enumerate_configs, enumerate_configs_with_length, ShiftedConfiguration};
use multirank::engine::{EvalMode, SolverSettings};
use multirank::experiment::{run_experiment, ExperimentPlan};
use multirank::generators::{generate_multiplex, GeneratorSpec, MultiplexSpec};
use multirank::measures::{self, CostMethod, WeightScheme};
use multirank::multiplex::{MultiplexNetwork, SparseMatrix};
use multirank::Error;

create_exception!(multirank, ParseError, PyValueError);
create_exception!(multirank, DimensionError, PyValueError);
create_exception!(multirank, NonConvergenceError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Parse { .. } | Error::Json(_) => ParseError::new_err(e.to_string()),
        Error::Dimension { .. } | Error::LayerOutOfRange { .. } => DimensionError::new_err(e.to_string()),
        Error::NonConvergence { .. } => NonConvergenceError::new_err(e.to_string()),
        Error::InvalidInput(_) | Error::UndefinedMeasure(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A multiplex network: shared vertices, one directed weighted graph per layer.
#[pyclass(name = "Multiplex", module = "multirank", frozen)]
struct PyMultiplex {
    inner: MultiplexNetwork,
}

#[pymethods]
impl PyMultiplex {
    /// Builds a multiplex from per-layer `(src, dst, weight)` lists.
    #[new]
    fn new(n: usize, layers: Vec<Vec<(usize, usize, f64)>>) -> PyResult<Self> {
        let layers = layers
            .into_iter()
            .map(|t| SparseMatrix::from_triplets(n, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_py)?;
        Ok(PyMultiplex {
            inner: MultiplexNetwork::new(n, layers).map_err(to_py)?,
        })
    }

    /// Parses edge-list text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        MultiplexNetwork::parse(text).map(|inner| PyMultiplex { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        MultiplexNetwork::load(path).map(|inner| PyMultiplex { inner }).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn layer_count(&self) -> usize {
        self.inner.layer_count()
    }

    #[getter]
    fn vertex_ids(&self) -> Vec<u64> {
        self.inner.vertex_ids().to_vec()
    }

    /// `(src, dst, weight)` entries of one layer.
    fn edges(&self, layer: usize) -> PyResult<Vec<(usize, usize, f64)>> {
        Ok(self.inner.layer(layer).map_err(to_py)?.entries().collect())
    }

    fn to_edge_list(&self) -> String {
        self.inner.to_edge_list()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    fn multijaccard(&self) -> PyResult<f64> {
        measures::multijaccard(&self.inner).map_err(to_py)
    }

    /// `(irreducible, aperiodic, period)` of the union graph.
    fn check(&self) -> (bool, bool, Option<usize>) {
        let d = self.inner.superposition_check();
        (d.irreducible, d.aperiodic, d.period)
    }

    fn __repr__(&self) -> String {
        format!("Multiplex(n={}, layers={})", self.inner.n(), self.inner.layer_count())
    }
}

/// Canonical class, shift and written order of a configuration string.
#[pyfunction]
fn parse_config(text: &str, layers: usize) -> PyResult<(String, usize, String)> {
    let sc = ShiftedConfiguration::parse(text, layers).map_err(to_py)?;
    Ok((sc.config().to_string(), sc.shift(), sc.to_string()))
}

/// Canonical representatives, optionally restricted to length `k`.
#[pyfunction]
#[pyo3(signature = (layers, k=None))]
fn enumerate(layers: usize, k: Option<usize>) -> PyResult<Vec<String>> {
    let configs = match k {
        Some(k) => enumerate_configs_with_length(layers, k),
        None => enumerate_configs(layers),
    }
    .map_err(to_py)?;
    Ok(configs.iter().map(|c| c.to_string()).collect())
}

#[pyfunction]
fn count_configs(layers: usize) -> u128 {
    config_count(layers)
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    PresetKind::ALL.iter().map(|k| k.name()).collect()
}

/// Rankings `r_0 ... r_{k-1}` for a configuration string or a preset name.
///
/// Returns a dict with `rankings` and, for configuration-based runs,
/// `sequence`, `final_tau`, `eigenvalue` and `trace`.
#[pyfunction]
#[pyo3(signature = (network, config=None, preset=None, damping=DEFAULT_DAMPING, tau0=0.5, inner_tol=1e-13, outer_tol=1e-10, max_outer_halvings=60, explicit_product=false))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    network: &PyMultiplex,
    config: Option<&str>,
    preset: Option<&str>,
    damping: f64,
    tau0: f64,
    inner_tol: f64,
    outer_tol: f64,
    max_outer_halvings: usize,
    explicit_product: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let settings = SolverSettings {
        tau0,
        inner_tol,
        outer_tol,
        max_outer_halvings,
        eval_mode: if explicit_product {
            EvalMode::ExplicitProduct
        } else {
            EvalMode::MatvecChain
        },
        ..SolverSettings::default()
    };
    settings.validate().map_err(to_py)?;
    let m = &network.inner;
    let out = PyDict::new(py);
    let report = match (config, preset) {
        (Some(text), None) => {
            let sc = ShiftedConfiguration::parse(text, m.layer_count()).map_err(to_py)?;
            py.detach(|| multirank::engine::solve(m, &sc, &settings)).map_err(to_py)?
        }
        (None, Some(name)) => {
            let preset = BaselinePreset {
                kind: name.parse::<PresetKind>().map_err(to_py)?,
                damping,
            };
            if preset.kind.is_native() {
                let r = py.detach(|| preset_rankings(m, preset, &settings)).map_err(to_py)?;
                let vs: Vec<Vec<f64>> = r.into_iter().map(|v| v.into_inner()).collect();
                out.set_item("rankings", vs)?;
                return Ok(out);
            }
            let (matrices, sc) = preset_configuration(preset, m.layer_count()).map_err(to_py)?;
            py.detach(|| solve_with_matrices(m, matrices, &sc, &settings)).map_err(to_py)?
        }
        _ => return Err(PyValueError::new_err("pass exactly one of `config` or `preset`")),
    };
    let trace: Vec<(usize, f64, usize, f64)> = report
        .per_tau_trace
        .iter()
        .map(|s| (s.halving, s.tau, s.inner_iterations, s.eigenvalue))
        .collect();
    let rankings: Vec<Vec<f64>> = report.rankings.into_iter().map(|v| v.into_inner()).collect();
    out.set_item("rankings", rankings)?;
    out.set_item("sequence", report.sequence)?;
    out.set_item("final_tau", report.final_tau)?;
    out.set_item("eigenvalue", report.principal_eigenvalue_estimate)?;
    out.set_item("trace", trace)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (reference, other, scheme="hyperbolic"))]
fn weighted_tau(reference: Vec<f64>, other: Vec<f64>, scheme: &str) -> PyResult<f64> {
    let scheme: WeightScheme = scheme.parse().map_err(to_py)?;
    Ok(measures::weighted_kendall_tau(&reference, &other, scheme).map_err(to_py)?.tau_w)
}

/// `(lo, hi, mean)` of the 95% Student-t interval.
#[pyfunction]
fn confidence_interval(samples: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let ci = measures::confidence_interval(&samples).map_err(to_py)?;
    Ok((ci.lo, ci.hi, ci.mean))
}

#[pyfunction]
#[pyo3(signature = (method, n, layers=2, k=None))]
fn cost_model(method: &str, n: u64, layers: u64, k: Option<u64>) -> PyResult<u128> {
    let method: CostMethod = method.parse().map_err(to_py)?;
    Ok(measures::cost_model(method, n, layers, k).map_err(to_py)?.operations)
}

#[pyfunction]
#[pyo3(signature = (ns=None, layers=2))]
fn cost_table(ns: Option<Vec<u64>>, layers: u64) -> PyResult<String> {
    let ns = ns.unwrap_or_else(|| measures::DEFAULT_COST_TABLE_SIZES.to_vec());
    measures::cost_table_csv(&ns, layers).map_err(to_py)
}

/// Seeded synthetic multiplex over an Erdős–Rényi (`"er"`) or SBM base graph.
#[pyfunction]
#[pyo3(signature = (generator="er", n=64, p=0.5, blocks=None, p_in=0.5, p_out=0.2, layers=2, layer_p=0.5, seed=0))]
#[allow(clippy::too_many_arguments)]
fn generate(
    generator: &str,
    n: usize,
    p: f64,
    blocks: Option<Vec<usize>>,
    p_in: f64,
    p_out: f64,
    layers: usize,
    layer_p: f64,
    seed: u64,
) -> PyResult<PyMultiplex> {
    let base = match generator {
        "er" => GeneratorSpec::erdos_renyi(n, p, seed),
        "sbm" => GeneratorSpec::planted_partition(blocks.unwrap_or_else(|| vec![n / 2, n - n / 2]), p_in, p_out, seed),
        other => return Err(PyValueError::new_err(format!("unknown generator `{other}`"))),
    };
    let spec = MultiplexSpec::uniform(base, layers, layer_p, seed.wrapping_add(1));
    Ok(PyMultiplex {
        inner: generate_multiplex(&spec, layers).map_err(to_py)?,
    })
}

/// Runs a JSON experiment plan; returns `(csv, summary_json)`.
#[pyfunction]
#[pyo3(signature = (plan_json, deterministic=true))]
fn experiment(py: Python<'_>, plan_json: &str, deterministic: bool) -> PyResult<(String, String)> {
    let plan: ExperimentPlan = serde_json::from_str(plan_json).map_err(|e| to_py(e.into()))?;
    let out = py.detach(|| run_experiment(&plan)).map_err(to_py)?;
    let summary = serde_json::to_string(&out.summary(deterministic)).map_err(|e| to_py(e.into()))?;
    Ok((out.to_csv(deterministic), summary))
}

#[pymodule(name = "multirank")]
fn multirank_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMultiplex>()?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(count_configs, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_tau, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_interval, m)?)?;
    m.add_function(wrap_pyfunction!(cost_model, m)?)?;
    m.add_function(wrap_pyfunction!(cost_table, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("DimensionError", m.py().get_type::<DimensionError>())?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
