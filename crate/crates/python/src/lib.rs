//! Python bindings. Field elements cross the boundary as hex strings,
//! exponent matrices as nested lists with `None` for `-inf`, and reports as
//! plain dicts. Symbol indices are 0-based.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;

use idos_core::debt::{classify_pattern, enumerate_worst_case_windows};
use idos_core::exponents::find_dominant_permutation;
use idos_core::simulate::simulate_channel;
use idos_core::verify::{self, VerifyMode, VerifyOptions};
use idos_core::{CodeParams, ConstructionKind, Exp, ExponentMatrix, FieldCtx, FieldElement, GeneratorSpec};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(err)?;
    PyModule::import(py, "json")?.call_method1("loads", (s,))
}

fn matrix_from(rows: Vec<Vec<Option<u64>>>) -> PyResult<ExponentMatrix> {
    ExponentMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(Exp::from).collect()).collect()).map_err(err)
}

fn matrix_to(m: &ExponentMatrix) -> Vec<Vec<Option<u64>>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(Exp::finite).collect()).collect()
}

/// GF(2^d) with `alpha` the class of `x`.
#[pyclass(name = "Field", frozen)]
struct PyField {
    ctx: FieldCtx,
}

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (degree, modulus=None, seed=None))]
    fn new(degree: usize, modulus: Option<Vec<usize>>, seed: Option<u64>) -> PyResult<Self> {
        let ctx = FieldCtx::new(degree, modulus.as_deref(), seed).map_err(err)?;
        Ok(PyField { ctx })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.ctx.degree()
    }

    #[getter]
    fn modulus(&self) -> Vec<usize> {
        self.ctx.modulus()
    }

    /// `alpha^e` as hex; `None` stands for `-inf` and gives zero.
    #[pyo3(signature = (e))]
    fn alpha_pow(&self, e: Option<u64>) -> String {
        self.ctx.to_hex(&self.ctx.pow_exp(Exp::from(e)))
    }

    fn add(&self, a: &str, b: &str) -> PyResult<String> {
        let (a, b) = (self.parse(a)?, self.parse(b)?);
        Ok(self.ctx.to_hex(&self.ctx.add(&a, &b)))
    }

    fn mul(&self, a: &str, b: &str) -> PyResult<String> {
        let (a, b) = (self.parse(a)?, self.parse(b)?);
        Ok(self.ctx.to_hex(&self.ctx.mul(&a, &b)))
    }

    fn inv(&self, a: &str) -> PyResult<String> {
        let a = self.parse(a)?;
        Ok(self.ctx.to_hex(&self.ctx.inv(&a).map_err(err)?))
    }

    /// Determinant of the lift `alpha^M`, as hex.
    fn lift_det(&self, rows: Vec<Vec<Option<u64>>>) -> PyResult<String> {
        let m = matrix_from(rows)?;
        let det = idos_core::exponents::lift(&m, &self.ctx).det().map_err(err)?;
        Ok(self.ctx.to_hex(&det))
    }
}

impl PyField {
    fn parse(&self, s: &str) -> PyResult<FieldElement> {
        self.ctx.parse_hex(s).map_err(err)
    }
}

#[pyclass(name = "GeneratorSpec", frozen)]
struct PySpec {
    spec: GeneratorSpec,
    ctx: FieldCtx,
}

#[pymethods]
impl PySpec {
    /// Construction "a" or "b"; the degree defaults to the construction's bound.
    #[staticmethod]
    #[pyo3(signature = (construction, n, k, m, tau, degree=None, seed=0, allow_below_bound=false))]
    #[allow(clippy::too_many_arguments)]
    fn construct(
        construction: &str,
        n: usize,
        k: usize,
        m: usize,
        tau: usize,
        degree: Option<usize>,
        seed: u64,
        allow_below_bound: bool,
    ) -> PyResult<Self> {
        let kind: ConstructionKind = construction.parse().map_err(err)?;
        let params = CodeParams::new(n, k, m, tau).map_err(err)?;
        let spec = GeneratorSpec::construct(kind, params, degree, None, seed, allow_below_bound).map_err(err)?;
        Self::wrap(spec)
    }

    /// Custom spec from matrices ordered `[M^(m), ..., M^(0)]`.
    #[staticmethod]
    #[pyo3(signature = (n, k, m, tau, matrices, degree, seed=0))]
    fn custom(
        n: usize,
        k: usize,
        m: usize,
        tau: usize,
        matrices: Vec<Vec<Vec<Option<u64>>>>,
        degree: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let params = CodeParams::new(n, k, m, tau).map_err(err)?;
        let mats = matrices.into_iter().map(matrix_from).collect::<PyResult<_>>()?;
        Self::wrap(GeneratorSpec::custom(params, mats, degree, None, seed).map_err(err)?)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Self::wrap(GeneratorSpec::from_json(s).map_err(err)?)
    }

    fn to_json(&self) -> String {
        self.spec.to_json()
    }

    #[getter]
    fn params(&self) -> (usize, usize, usize, usize) {
        let p = self.spec.params;
        (p.n, p.k, p.m, p.tau)
    }

    #[getter]
    fn degree(&self) -> usize {
        self.spec.degree
    }

    #[getter]
    fn modulus(&self) -> Vec<usize> {
        self.spec.modulus.clone()
    }

    /// `M^(t)` as nested lists.
    fn matrix(&self, t: usize) -> PyResult<Vec<Vec<Option<u64>>>> {
        if t > self.spec.params.m {
            return Err(PyValueError::new_err(format!("t must be at most m = {}", self.spec.params.m)));
        }
        Ok(matrix_to(self.spec.matrix(t)))
    }

    fn field(&self) -> PyField {
        PyField { ctx: self.ctx.clone() }
    }

    fn __repr__(&self) -> String {
        format!("GeneratorSpec({:?} {}, degree={})", self.spec.construction, self.spec.params, self.spec.degree)
    }
}

impl PySpec {
    fn wrap(spec: GeneratorSpec) -> PyResult<Self> {
        let ctx = spec.field().map_err(err)?;
        Ok(PySpec { spec, ctx })
    }
}

#[pyclass(name = "Encoder")]
struct PyEncoder {
    enc: idos_core::Encoder,
    ctx: FieldCtx,
}

#[pymethods]
impl PyEncoder {
    #[new]
    fn new(spec: &PySpec) -> PyResult<Self> {
        Ok(PyEncoder {
            enc: idos_core::Encoder::new(&spec.spec, &spec.ctx).map_err(err)?,
            ctx: spec.ctx.clone(),
        })
    }

    /// Encodes the next slot's `k` messages into `n` symbols.
    fn encode_step(&mut self, messages: Vec<String>) -> PyResult<Vec<String>> {
        let s: Vec<FieldElement> = messages.iter().map(|h| self.ctx.parse_hex(h)).collect::<Result<_, _>>().map_err(err)?;
        let c = self.enc.encode_step(&s).map_err(err)?;
        Ok(c.iter().map(|e| self.ctx.to_hex(e)).collect())
    }
}

#[pyclass(name = "Decoder")]
struct PyDecoder {
    dec: idos_core::Decoder,
    ctx: FieldCtx,
}

#[pymethods]
impl PyDecoder {
    #[new]
    fn new(spec: &PySpec) -> PyResult<Self> {
        Ok(PyDecoder {
            dec: idos_core::Decoder::new(&spec.spec, &spec.ctx).map_err(err)?,
            ctx: spec.ctx.clone(),
        })
    }

    /// Feeds slot `t` (1-based) with `(index, hex)` pairs; returns event dicts.
    fn ingest<'py>(&mut self, py: Python<'py>, t: u64, received: Vec<(usize, String)>) -> PyResult<Bound<'py, PyAny>> {
        let rx: Vec<(usize, FieldElement)> = received
            .iter()
            .map(|(j, h)| self.ctx.parse_hex(h).map(|v| (*j, v)))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let events = self.dec.ingest(t, &rx).map_err(err)?;
        let records: Vec<_> = events
            .iter()
            .map(|e| idos_core::codec::EventRecord::from_event(e, &self.ctx))
            .collect();
        to_py(py, &records)
    }

    #[getter]
    fn debt(&self) -> u64 {
        self.dec.debt().debt
    }
}

#[pyfunction]
fn find_dominant_permutation_py<'py>(py: Python<'py>, rows: Vec<Vec<Option<u64>>>) -> PyResult<Bound<'py, PyAny>> {
    let m = matrix_from(rows)?;
    if !m.is_square() {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    to_py(py, &find_dominant_permutation(&m))
}

#[pyfunction]
fn worst_case_windows(n: usize, k: usize, m: usize, tau: usize) -> PyResult<Vec<Vec<usize>>> {
    Ok(enumerate_worst_case_windows(&CodeParams::new(n, k, m, tau).map_err(err)?))
}

#[pyfunction]
fn classify<'py>(py: Python<'py>, n: usize, k: usize, m: usize, tau: usize, counts: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &classify_pattern(&CodeParams::new(n, k, m, tau).map_err(err)?, &counts))
}

#[pyfunction]
#[pyo3(signature = (spec, mode="both", jobs=1, max_cases=None, seed=0, trials=3))]
fn verify_idos<'py>(
    py: Python<'py>,
    spec: &PySpec,
    mode: &str,
    jobs: usize,
    max_cases: Option<u128>,
    seed: u64,
    trials: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = VerifyOptions {
        mode: mode.parse::<VerifyMode>().map_err(err)?,
        jobs,
        max_cases,
        seed,
        trials,
    };
    to_py(py, &verify::verify_idos(&spec.spec, &spec.ctx, &opts).map_err(err)?)
}

#[pyfunction]
fn verify_dominance_structure<'py>(py: Python<'py>, n: usize, k: usize, tau: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::verify_dominance_structure(n, k, tau).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (spec, epsilon, slots, seed=0))]
fn simulate<'py>(py: Python<'py>, spec: &PySpec, epsilon: f64, slots: u64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &simulate_channel(&spec.spec, &spec.ctx, epsilon, slots, seed).map_err(err)?)
}

#[pymodule]
pub fn idos(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PySpec>()?;
    m.add_class::<PyEncoder>()?;
    m.add_class::<PyDecoder>()?;
    let f = wrap_pyfunction!(find_dominant_permutation_py, m)?;
    m.add("find_dominant_permutation", f)?;
    m.add_function(wrap_pyfunction!(worst_case_windows, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(verify_idos, m)?)?;
    m.add_function(wrap_pyfunction!(verify_dominance_structure, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
