//! Python bindings for the bilinear-program solver. The surface mirrors
//! the CLI: instances move as JSON text in the shared file format, and
//! every operation returns its report as a JSON string with the same
//! stable key order the CLI prints.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dbp_core::exact::Rational;
use dbp_core::harness::{fuzz_campaign, CampaignConfig};
use dbp_core::instance::{check_perfect, DbpInstance};
use dbp_core::oracle::{check_duality, oracle_value};
use dbp_core::reductions::{
    parse_reduction_input, reduce_boolean_feasibility, reduce_boolean_lp_bigm, reduce_plcp,
    ReductionInput,
};
use dbp_core::solver::{decide_subset, solve, SolveOptions};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string_pretty(value).map_err(value_err)
}

/// A disjoint bilinear program over a perfect polytope.
#[pyclass(name = "Instance", module = "dbp_py", skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: DbpInstance,
}

#[pymethods]
impl PyInstance {
    /// Parses an instance from the shared JSON text format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = DbpInstance::from_json_str(text).map_err(value_err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_err)?;
        Self::from_json(&text)
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    /// Raises when dimensions disagree, `rank(D) < m`, or X is empty or
    /// unbounded.
    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(value_err)
    }

    /// Perfect-polytope report for the Y system, as JSON.
    fn check_perfect(&self) -> PyResult<String> {
        let report = check_perfect(&self.inner.d, &self.inner.d_rhs).map_err(value_err)?;
        to_json(&report)
    }

    /// Runs the exact solver; returns the solve report as JSON.
    #[pyo3(signature = (skip_validation = false, tighten = false))]
    fn solve(&self, skip_validation: bool, tighten: bool) -> PyResult<String> {
        let opts = SolveOptions {
            skip_validation,
            tighten_bounds: tighten,
        };
        let result = solve(&self.inner, &opts).map_err(value_err)?;
        Ok(result.to_json_string())
    }

    /// Brute-force optimum by vertex enumeration, as JSON.
    fn oracle(&self) -> PyResult<String> {
        let result = oracle_value(&self.inner).map_err(value_err)?;
        to_json(&result)
    }

    /// Level-set decision at `h` (an integer or `"p/q"` string), as JSON.
    fn check_subset(&self, h: &str) -> PyResult<String> {
        let h: Rational = h.parse().map_err(value_err)?;
        let decision = decide_subset(&self.inner, &h).map_err(value_err)?;
        to_json(&decision)
    }

    /// Duality cross-check report, as JSON.
    fn duality(&self) -> PyResult<String> {
        let report = check_duality(&self.inner).map_err(value_err)?;
        to_json(&report)
    }

    fn content_hash(&self) -> String {
        format!("{:016x}", self.inner.content_hash())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, m={}, q={}, p={})",
            self.inner.n, self.inner.m, self.inner.q, self.inner.p
        )
    }
}

fn reduce_from(text: &str, expected: &str) -> PyResult<PyInstance> {
    let input = parse_reduction_input(text).map_err(value_err)?;
    if input.kind() != expected {
        return Err(value_err(format!(
            "input is kind {:?}, expected {expected:?}",
            input.kind()
        )));
    }
    let inner = match input {
        ReductionInput::Boolean(bs) => reduce_boolean_feasibility(&bs),
        ReductionInput::BooleanLp { c, system } => {
            reduce_boolean_lp_bigm(&c, &system).map_err(value_err)?
        }
        ReductionInput::Plcp(pp) => reduce_plcp(&pp).map_err(value_err)?,
    };
    Ok(PyInstance { inner })
}

/// Boolean feasibility system (kind "boolean") to a bilinear instance.
#[pyfunction]
fn reduce_boolean(text: &str) -> PyResult<PyInstance> {
    reduce_from(text, "boolean")
}

/// Boolean linear program (kind "boolean-lp") to a big-M instance.
#[pyfunction]
fn reduce_boolean_lp(text: &str) -> PyResult<PyInstance> {
    reduce_from(text, "boolean-lp")
}

/// Piecewise-linear concave program (kind "plcp") to an instance.
#[pyfunction]
fn reduce_plcp_input(text: &str) -> PyResult<PyInstance> {
    reduce_from(text, "plcp")
}

/// Runs a solver-vs-oracle campaign from a JSON config; returns the
/// campaign report as JSON. Reproducers are written to `out_dir` if given.
#[pyfunction]
#[pyo3(signature = (config, out_dir = None))]
fn run_campaign(config: &str, out_dir: Option<&str>) -> PyResult<String> {
    let cfg = CampaignConfig::from_json_str(config).map_err(value_err)?;
    let report = fuzz_campaign(&cfg, out_dir.map(std::path::Path::new)).map_err(value_err)?;
    Ok(report.to_json_string())
}

#[pymodule]
fn dbp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(reduce_boolean, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_boolean_lp, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_plcp_input, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    Ok(())
}
