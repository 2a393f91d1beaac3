//! Python module `splicekit`. Graphs and actions are passed as wrapper objects built from JSON;
//! structured results come back as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use splicekit::catalog;
use splicekit::engine::{analyze_knot_with, analyze_link_with};
use splicekit::symmetry::reduce;
use splicekit::{AmphichiralAction, AnalyzeOptions, Certificate, CompanionshipGraph};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Graph", module = "splicekit", from_py_object)]
#[derive(Clone)]
pub struct PyGraph {
    inner: CompanionshipGraph,
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CompanionshipGraph::from_json(text).map(|inner| PyGraph { inner }).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn vertex_ids(&self) -> Vec<String> {
        self.inner.vertex_ids().into_iter().collect()
    }

    fn edge_ids(&self) -> Vec<String> {
        self.inner.edge_ids().into_iter().collect()
    }

    fn __len__(&self) -> usize {
        self.inner.vertices.len()
    }

    fn __repr__(&self) -> String {
        format!("Graph({} vertices, {} edges)", self.inner.vertices.len(), self.inner.edges.len())
    }
}

#[pyclass(name = "Action", module = "splicekit", from_py_object)]
#[derive(Clone)]
pub struct PyAction {
    inner: AmphichiralAction,
}

#[pymethods]
impl PyAction {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        AmphichiralAction::from_json(text).map(|inner| PyAction { inner }).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Action({} external signs)", self.inner.external_signs.len())
    }
}

#[pyfunction]
#[pyo3(signature = (graph, action = None))]
fn validate<'py>(py: Python<'py>, graph: &PyGraph, action: Option<&PyAction>) -> PyResult<Bound<'py, PyAny>> {
    match action {
        Some(a) => to_py(py, &splicekit::validate_action(&graph.inner, &a.inner)),
        None => to_py(py, &splicekit::validate(&graph.inner)),
    }
}

#[pyfunction]
fn complexity<'py>(py: Python<'py>, graph: &PyGraph) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &splicekit::complexity(&graph.inner))
}

/// Returns the two sides of the cut as `Graph` objects.
#[pyfunction]
fn edge_cut(graph: &PyGraph, edge: &str) -> PyResult<(PyGraph, PyGraph)> {
    let cut = splicekit::edge_cut(&graph.inner, edge).map_err(value_error)?;
    Ok((PyGraph { inner: cut.side1 }, PyGraph { inner: cut.side2 }))
}

#[pyfunction]
fn enumerate_norms(atoms: Vec<f64>, bound: f64) -> PyResult<Vec<f64>> {
    splicekit::enumerate_norms(&atoms, bound).map_err(value_error)
}

/// The reduced action and the exponent it was raised to.
#[pyfunction]
fn reduce_action(graph: &PyGraph, action: &PyAction) -> PyResult<(PyAction, u64)> {
    let r = reduce(&graph.inner, &action.inner).map_err(value_error)?;
    Ok((PyAction { inner: r.action }, r.exponent))
}

fn analyze<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    action: &PyAction,
    search: bool,
    link: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = AnalyzeOptions { search, ..AnalyzeOptions::default() };
    let run = if link { analyze_link_with } else { analyze_knot_with };
    let (verdict, cert) =
        run(&graph.inner, &action.inner, &opts).map_err(|e| value_error(format!("{}: {e}", e.name())))?;
    to_py(py, &serde_json::json!({ "verdict": verdict, "certificate": cert }))
}

/// Returns `{"verdict": ..., "certificate": ...}`; raises `ValueError` when the input is refused.
#[pyfunction]
#[pyo3(signature = (graph, action, search = false))]
fn analyze_knot<'py>(py: Python<'py>, graph: &PyGraph, action: &PyAction, search: bool) -> PyResult<Bound<'py, PyAny>> {
    analyze(py, graph, action, search, false)
}

#[pyfunction]
#[pyo3(signature = (graph, action, search = false))]
fn analyze_link<'py>(py: Python<'py>, graph: &PyGraph, action: &PyAction, search: bool) -> PyResult<Bound<'py, PyAny>> {
    analyze(py, graph, action, search, true)
}

/// Re-checks a certificate given as JSON text. Raises `ValueError` naming the first mismatch.
#[pyfunction]
fn replay(certificate: &str, graph: &PyGraph, action: &PyAction) -> PyResult<()> {
    let cert: Certificate = serde_json::from_str(certificate).map_err(value_error)?;
    splicekit::replay(&cert, &graph.inner, &action.inner).map_err(value_error)
}

/// Coefficients of a symmetric Alexander polynomial, lowest degree first.
#[pyfunction]
fn fox_milnor<'py>(py: Python<'py>, coeffs: Vec<i64>) -> PyResult<Bound<'py, PyAny>> {
    let result = catalog::fox_milnor_factor(&catalog::IntPolynomial::new(coeffs)).map_err(value_error)?;
    to_py(py, &result)
}

#[pyfunction]
fn fixture_names() -> Vec<String> {
    catalog::fixtures().into_iter().map(|f| f.name).collect()
}

/// The named catalog entry as `(graph, action)`.
#[pyfunction]
fn fixture(name: &str) -> PyResult<(PyGraph, PyAction)> {
    let f = catalog::fixture(name).ok_or_else(|| value_error(format!("unknown fixture {name}")))?;
    Ok((PyGraph { inner: f.graph }, PyAction { inner: f.action }))
}

#[pyfunction]
fn run_fixture<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    let f = catalog::fixture(name).ok_or_else(|| value_error(format!("unknown fixture {name}")))?;
    to_py(py, &catalog::run_fixture(&f))
}

#[pymodule]
#[pyo3(name = "splicekit")]
fn splicekit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyAction>()?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(complexity, m)?)?;
    m.add_function(wrap_pyfunction!(edge_cut, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_norms, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_action, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_knot, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_link, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(fox_milnor, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(run_fixture, m)?)?;
    Ok(())
}
