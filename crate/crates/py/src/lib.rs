//! Python bindings for the `iwasawa` crate.
//!
//! Structured values cross the boundary as the same JSON shapes the CLI uses,
//! rationals as strings "p/q".

use iwasawa::flag::Flag;
use iwasawa::forms::{check_pullback_hypotheses, parse_form};
use iwasawa::gradedaut::{classify, GradedMap};
use iwasawa::io;
use iwasawa::nilpotent::{GroupElement, LieElement};
use iwasawa::pansu::{pansu_differential, PolyMapSpec};
use iwasawa::{Field, Rational};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyList;
use serde_json::Value;

fn err(e: iwasawa::Error) -> PyErr {
    match e {
        iwasawa::Error::Parse(m) => PyValueError::new_err(m),
        other => PyArithmeticError::new_err(other.to_string()),
    }
}

fn to_value(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let json = obj.py().import_bound("json")?;
    let s: String = json.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<PyObject> {
    let json = py.import_bound("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

fn field(s: &str) -> PyResult<Field> {
    s.parse().map_err(|_| PyValueError::new_err(format!("unknown field {s:?}")))
}

fn rational(s: &str) -> PyResult<Rational> {
    iwasawa::scalar::parse_rational(s).map_err(err)
}

fn with_header(n: usize, f: &str, key: &str, payload: &Bound<'_, PyAny>) -> PyResult<Value> {
    let mut v = serde_json::Map::new();
    v.insert("n".into(), n.into());
    v.insert("field".into(), f.into());
    v.insert(key.into(), to_value(payload)?);
    Ok(Value::Object(v))
}

#[pyclass(name = "LieElement", module = "iwasawa_py")]
#[derive(Clone)]
struct PyLie(LieElement);

#[pymethods]
impl PyLie {
    /// `terms` is a list of {"i", "j", "c", "value"} with 1-based i < j.
    #[new]
    fn new(n: usize, field: &str, terms: &Bound<'_, PyAny>) -> PyResult<Self> {
        let v = with_header(n, field, "terms", terms)?;
        Ok(PyLie(io::lie_element_from_json(&v, "$").map_err(err)?))
    }

    #[staticmethod]
    fn zero(n: usize, field: &str) -> PyResult<Self> {
        Ok(PyLie(LieElement::zero(n, self::field(field)?)))
    }

    /// Real unit c ∈ {0, 1, 2, 3} in entry (i, j), 1-based.
    #[staticmethod]
    fn unit(n: usize, field: &str, i: usize, j: usize, c: usize) -> PyResult<Self> {
        let f = self::field(field)?;
        if !(1 <= i && i < j && j <= n && c < f.real_dim()) {
            return Err(PyValueError::new_err("need 1 <= i < j <= n and c below the real dimension"));
        }
        Ok(PyLie(LieElement::unit(n, f, i, j, c)))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn field(&self) -> String {
        self.0.field().to_string()
    }

    fn coords(&self) -> Vec<String> {
        self.0.coords().iter().map(|r| r.to_string()).collect()
    }

    fn bracket(&self, other: &PyLie) -> PyResult<Self> {
        self.0.bracket(&other.0).map(PyLie).map_err(err)
    }

    fn dilate(&self, r: &str) -> PyResult<Self> {
        self.0.dilate(&rational(r)?).map(PyLie).map_err(err)
    }

    fn scale(&self, r: &str) -> PyResult<Self> {
        Ok(PyLie(self.0.scale(&rational(r)?)))
    }

    fn tau(&self) -> Self {
        PyLie(self.0.tau())
    }

    fn exp(&self) -> PyGroup {
        PyGroup(self.0.exp())
    }

    fn __add__(&self, other: &PyLie) -> PyResult<Self> {
        same(&self.0, &other.0)?;
        Ok(PyLie(self.0.add(&other.0)))
    }

    fn __sub__(&self, other: &PyLie) -> PyResult<Self> {
        same(&self.0, &other.0)?;
        Ok(PyLie(self.0.sub(&other.0)))
    }

    fn __neg__(&self) -> Self {
        PyLie(self.0.neg())
    }

    fn __eq__(&self, other: &PyLie) -> bool {
        self.0 == other.0
    }

    fn to_json(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &io::lie_element_to_json(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("LieElement({})", io::lie_element_to_json(&self.0))
    }
}

fn same(a: &LieElement, b: &LieElement) -> PyResult<()> {
    if a.n() != b.n() || a.field() != b.field() {
        return Err(PyValueError::new_err("elements live in different algebras"));
    }
    Ok(())
}

#[pyclass(name = "GroupElement", module = "iwasawa_py")]
#[derive(Clone)]
struct PyGroup(GroupElement);

#[pymethods]
impl PyGroup {
    /// `matrix` is a list of rows of scalars, upper unipotent.
    #[new]
    fn new(n: usize, field: &str, matrix: &Bound<'_, PyAny>) -> PyResult<Self> {
        let v = with_header(n, field, "matrix", matrix)?;
        Ok(PyGroup(io::group_element_from_json(&v, "$").map_err(err)?))
    }

    #[staticmethod]
    fn identity(n: usize, field: &str) -> PyResult<Self> {
        Ok(PyGroup(GroupElement::identity(n, self::field(field)?)))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn field(&self) -> String {
        self.0.field().to_string()
    }

    fn log(&self) -> PyLie {
        PyLie(self.0.log())
    }

    fn inverse(&self) -> Self {
        PyGroup(self.0.inv())
    }

    fn dilate(&self, r: &str) -> PyResult<Self> {
        self.0.dilate(&rational(r)?).map(PyGroup).map_err(err)
    }

    fn tau(&self) -> Self {
        PyGroup(self.0.tau())
    }

    fn __mul__(&self, other: &PyGroup) -> PyResult<Self> {
        self.0.mul(&other.0).map(PyGroup).map_err(err)
    }

    fn __eq__(&self, other: &PyGroup) -> bool {
        self.0 == other.0
    }

    fn to_json(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &io::group_element_to_json(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("GroupElement({})", io::group_element_to_json(&self.0))
    }
}

#[pyclass(name = "Flag", module = "iwasawa_py")]
#[derive(Clone)]
struct PyFlag(Flag);

#[pymethods]
impl PyFlag {
    /// W_j is spanned by the last j columns of the invertible `matrix`.
    #[new]
    fn new(n: usize, field: &str, matrix: &Bound<'_, PyAny>) -> PyResult<Self> {
        let v = with_header(n, field, "matrix", matrix)?;
        Ok(PyFlag(io::flag_from_json(&v, "$").map_err(err)?))
    }

    #[staticmethod]
    fn base_minus(n: usize, field: &str) -> PyResult<Self> {
        Ok(PyFlag(Flag::base_minus(n, self::field(field)?)))
    }

    #[staticmethod]
    fn base_plus(n: usize, field: &str) -> PyResult<Self> {
        Ok(PyFlag(Flag::base_plus(n, self::field(field)?)))
    }

    #[staticmethod]
    fn alpha(g: &PyGroup) -> Self {
        PyFlag(Flag::alpha(&g.0))
    }

    fn alpha_inverse(&self) -> PyResult<PyGroup> {
        self.0.alpha_inverse().map(PyGroup).map_err(err)
    }

    fn in_nhat(&self) -> bool {
        self.0.in_nhat()
    }

    fn psi(&self) -> Self {
        PyFlag(self.0.psi())
    }

    fn dilate(&self, r: &str) -> PyResult<Self> {
        self.0.dilate(&rational(r)?).map(PyFlag).map_err(err)
    }

    /// Act by an invertible matrix given as rows of scalars.
    fn act(&self, matrix: &Bound<'_, PyAny>) -> PyResult<Self> {
        let m = io::matrix_from_json(self.0.field(), &to_value(matrix)?, "$").map_err(err)?;
        self.0.act_matrix(&m).map(PyFlag).map_err(err)
    }

    fn __eq__(&self, other: &PyFlag) -> bool {
        self.0 == other.0
    }

    fn to_json(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &io::flag_to_json(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("Flag({})", io::flag_to_json(&self.0))
    }
}

#[pyclass(name = "GradedMap", module = "iwasawa_py")]
#[derive(Clone)]
struct PyGradedMap(GradedMap);

#[pymethods]
impl PyGradedMap {
    /// Extend a real-linear map of the first layer, given as a rational matrix.
    #[new]
    fn new(n: usize, field: &str, v1: &Bound<'_, PyAny>) -> PyResult<Self> {
        let v = with_header(n, field, "v1", v1)?;
        Ok(PyGradedMap(io::graded_map_from_json(&v, "$").map_err(err)?))
    }

    /// Reconstruct from a certificate {"epsilon", "lambda", "h"}.
    #[staticmethod]
    fn from_certificate(n: usize, field: &str, certificate: &Bound<'_, PyAny>) -> PyResult<Self> {
        let f = self::field(field)?;
        let cert = io::certificate_from_json(f, &to_value(certificate)?, "$").map_err(err)?;
        cert.reconstruct(n, f).map(PyGradedMap).map_err(err)
    }

    fn apply(&self, x: &PyLie) -> PyResult<PyLie> {
        self.0.apply(&x.0).map(PyLie).map_err(err)
    }

    fn classify(&self, py: Python<'_>) -> PyResult<PyObject> {
        let cert = classify(&self.0).map_err(err)?;
        to_py(py, &io::certificate_to_json(&cert))
    }

    fn to_json(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &io::graded_map_to_json(&self.0))
    }
}

/// Degree, weight and closedness verdicts for a pair of forms such as
/// ("omega_plus", "eta_3_minus").
#[pyfunction]
fn check_pair(py: Python<'_>, n: usize, field: &str, alpha: &str, beta: &str) -> PyResult<PyObject> {
    let f = self::field(field)?;
    let a = parse_form(n, f, alpha).map_err(err)?;
    let b = parse_form(n, f, beta).map_err(err)?;
    let r = check_pullback_hypotheses(&a, &b).map_err(err)?;
    to_py(py, &io::pullback_report_to_json(&r))
}

/// The Pansu differential of a polynomial map at a point, as a graded map.
/// `map` is a map spec or "contact-shear".
#[pyfunction]
#[pyo3(signature = (map, point=None))]
fn pansu_diff(map: &Bound<'_, PyAny>, point: Option<&PyGroup>) -> PyResult<PyGradedMap> {
    let spec = match map.extract::<String>() {
        Ok(s) if s == "contact-shear" => PolyMapSpec::contact_shear(),
        Ok(s) => return Err(PyValueError::new_err(format!("unknown map {s:?}"))),
        Err(_) => io::map_spec_from_json(&to_value(map)?, "$").map_err(err)?,
    };
    let x = match point {
        Some(p) => p.0.clone(),
        None => GroupElement::identity(spec.n, spec.field),
    };
    pansu_differential(&spec, &x).map(PyGradedMap).map_err(err)
}

/// Run the command line tool in-process; returns (exit code, stdout, stderr).
#[pyfunction]
fn cli(args: &Bound<'_, PyList>) -> PyResult<(i32, String, String)> {
    let mut argv = vec!["iwasawa".to_string()];
    for a in args.iter() {
        argv.push(a.extract()?);
    }
    let (mut out, mut errs) = (Vec::new(), Vec::new());
    let code = iwasawa::cli::run(argv, &mut out, &mut errs);
    Ok((code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&errs).into_owned()))
}

#[pymodule]
fn iwasawa_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLie>()?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PyFlag>()?;
    m.add_class::<PyGradedMap>()?;
    m.add_function(wrap_pyfunction!(check_pair, m)?)?;
    m.add_function(wrap_pyfunction!(pansu_diff, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
