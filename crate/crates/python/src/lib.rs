//! Python bindings. Reports come back as plain dicts; algebra objects print
//! in the same expression syntax the parser reads.

use std::sync::Arc;

use ncsphere::homs::{kill_zn, to_even, x_to_zero};
use ncsphere::rep::{counterexample_sum, eval_matrix, grid_norm, CMatrix};
use ncsphere::winding::{winding as loop_winding, winding_report};
use ncsphere::{
    factor_rotation, is_sphere_unitary, parse, print, suites, zgen, Context as CoreContext, Error, GeneratorMap,
    GridSpec, MatrixLoop, ParameterMatrix, PolyMatrix, RationalRep, RotationAction, SpherePoint, StarPolynomial,
    SuiteConfig, Tolerances, ValidationMode,
};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::Value;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_arg(text: &str) -> PyResult<Value> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("json: {e}")))
}

/// A JSON value as a Python object via the stdlib json module.
fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (v.to_string(),))?.unbind())
}

fn cmatrix_to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn rows_to_cmatrix(rows: &[Vec<Complex64>]) -> PyResult<CMatrix> {
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(CMatrix::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

/// Generators z1..zn with phases ρ, plus x for even spheres.
#[pyclass(name = "Context", module = "ncsphere_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyContext(Arc<CoreContext>);

#[pymethods]
impl PyContext {
    /// `angles` is the full antisymmetric matrix of angle strings such as
    /// "1/3" (ρ_jk = e^{2πi·angle}).
    #[new]
    #[pyo3(signature = (angles, even = false, conductor = 1))]
    fn new(angles: Vec<Vec<String>>, even: bool, conductor: u64) -> PyResult<Self> {
        let parsed = angles
            .iter()
            .map(|row| row.iter().map(|a| a.parse()).collect::<ncsphere::Result<Vec<_>>>())
            .collect::<ncsphere::Result<Vec<_>>>()
            .map_err(err)?;
        let rho = ParameterMatrix::new(parsed).map_err(err)?;
        Ok(PyContext(CoreContext::new(rho, even, conductor)))
    }

    /// From a parameter-matrix or context JSON string.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreContext::from_json_value(&json_arg(text)?).map(PyContext).map_err(err)
    }

    #[staticmethod]
    fn commutative(n: usize) -> Self {
        PyContext(CoreContext::odd(ParameterMatrix::commutative(n)))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn even(&self) -> bool {
        self.0.has_x()
    }

    #[getter]
    fn conductor(&self) -> Option<u64> {
        self.0.conductor()
    }

    /// Same generators over a field containing the `extra`-th roots of unity.
    fn extended(&self, extra: u64) -> Self {
        PyContext(self.0.extended(extra))
    }

    fn parse(&self, expr: &str) -> PyResult<Poly> {
        parse(expr, &self.0).map(Poly).map_err(err)
    }

    /// One-based generator z_j.
    fn gen(&self, j: usize) -> PyResult<Poly> {
        self.0.check_index(j.wrapping_sub(1)).map_err(err)?;
        Ok(Poly(self.0.gen(j - 1)))
    }

    fn one(&self) -> Poly {
        Poly(self.0.one())
    }

    fn sphere_polynomial(&self) -> Poly {
        Poly(self.0.sphere_polynomial())
    }

    /// The 2^{k-1} square generator matrix Z(k).
    fn zgen(&self, k: usize) -> PyResult<Matrix> {
        zgen(&self.0, k).map(Matrix).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json_value().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Context({})", self.0.to_json_value())
    }
}

/// A normal-ordered *-polynomial.
#[pyclass(name = "Poly", module = "ncsphere_py", frozen, from_py_object)]
#[derive(Clone)]
struct Poly(StarPolynomial);

#[pymethods]
impl Poly {
    fn adjoint(&self) -> Poly {
        Poly(self.0.adjoint())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    #[getter]
    fn context(&self) -> PyContext {
        PyContext(self.0.ctx().clone())
    }

    fn __add__(&self, other: &Poly) -> PyResult<Poly> {
        self.0.try_add(&other.0).map(Poly).map_err(err)
    }

    fn __sub__(&self, other: &Poly) -> PyResult<Poly> {
        self.0.try_sub(&other.0).map(Poly).map_err(err)
    }

    fn __mul__(&self, other: &Poly) -> PyResult<Poly> {
        self.0.try_mul(&other.0).map(Poly).map_err(err)
    }

    fn __neg__(&self) -> Poly {
        Poly(self.0.neg_poly())
    }

    fn __pow__(&self, k: u32, _modulo: Option<Py<PyAny>>) -> Poly {
        Poly(self.0.pow(k))
    }

    fn __eq__(&self, other: &Poly) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        print(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Poly({:?})", print(&self.0))
    }
}

/// A matrix of *-polynomials.
#[pyclass(name = "Matrix", module = "ncsphere_py", frozen, from_py_object)]
#[derive(Clone)]
struct Matrix(PolyMatrix);

#[pymethods]
impl Matrix {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        PolyMatrix::from_json_value(&json_arg(text)?, None).map(Matrix).map_err(err)
    }

    #[getter]
    fn rows(&self) -> usize {
        self.0.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.0.cols()
    }

    /// Zero-based entry.
    fn entry(&self, i: usize, j: usize) -> PyResult<Poly> {
        if i >= self.0.rows() || j >= self.0.cols() {
            return Err(PyValueError::new_err("entry out of range"));
        }
        Ok(Poly(self.0.get(i, j).clone()))
    }

    fn adjoint(&self) -> Matrix {
        Matrix(self.0.adjoint())
    }

    fn direct_sum(&self, other: &Matrix) -> PyResult<Matrix> {
        self.0.direct_sum(&other.0).map(Matrix).map_err(err)
    }

    /// M M* = M* M = (z1 z1' + ... + z_upto z_upto') I, exactly.
    fn is_sphere_unitary(&self, upto: usize) -> PyResult<bool> {
        is_sphere_unitary(&self.0, upto).map(|r| r.unitary).map_err(err)
    }

    fn __mul__(&self, other: &Matrix) -> PyResult<Matrix> {
        self.0.mul(&other.0).map(Matrix).map_err(err)
    }

    fn __add__(&self, other: &Matrix) -> PyResult<Matrix> {
        self.0.add(&other.0).map(Matrix).map_err(err)
    }

    fn __sub__(&self, other: &Matrix) -> PyResult<Matrix> {
        self.0.sub(&other.0).map(Matrix).map_err(err)
    }

    fn __eq__(&self, other: &Matrix) -> bool {
        self.0 == other.0
    }

    fn to_json(&self) -> String {
        self.0.to_json_value().to_string()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[derive(FromPyObject)]
enum Operand {
    Poly(Poly),
    Matrix(Matrix),
}

impl Operand {
    fn into_py(self, py: Python<'_>, f: impl FnOnce(&Operand) -> ncsphere::Result<Operand>) -> PyResult<Py<PyAny>> {
        Ok(match f(&self).map_err(err)? {
            Operand::Poly(p) => Py::new(py, p)?.into_any(),
            Operand::Matrix(m) => Py::new(py, m)?.into_any(),
        })
    }
}

/// z_i ↦ α_i z_i with α_i a primitive k-th root of unity.
#[pyclass(name = "Rotation", module = "ncsphere_py", frozen, from_py_object)]
#[derive(Clone)]
struct Rotation(RotationAction);

#[pymethods]
impl Rotation {
    #[new]
    fn new(k: u64, alphas: Vec<String>) -> PyResult<Self> {
        let alphas = alphas.iter().map(|a| a.parse()).collect::<ncsphere::Result<Vec<_>>>().map_err(err)?;
        RotationAction::new(k, alphas).map(Rotation).map_err(err)
    }

    /// z_i ↦ −z_i on n generators.
    #[staticmethod]
    fn antipodal(n: usize) -> Self {
        Rotation(RotationAction::antipodal(n))
    }

    #[getter]
    fn k(&self) -> u64 {
        self.0.k()
    }

    fn apply(&self, py: Python<'_>, x: Operand) -> PyResult<Py<PyAny>> {
        x.into_py(py, |x| {
            Ok(match x {
                Operand::Poly(p) => Operand::Poly(Poly(self.0.apply(&p.0)?)),
                Operand::Matrix(m) => Operand::Matrix(Matrix(self.0.apply_matrix(&m.0)?)),
            })
        })
    }

    /// Class in Z_k, or None when the polynomial is inhomogeneous.
    fn homogeneity_class(&self, p: &Poly) -> PyResult<Option<u64>> {
        self.0.homogeneity_class(&p.0).map_err(err)
    }

    fn project(&self, p: &Poly, j: u64) -> PyResult<Poly> {
        self.0.graded_project(&p.0, j).map(Poly).map_err(err)
    }

    /// Diagonal A, B with R(M) = A M B, as a dict of exponents and matrices.
    fn factor(&self, py: Python<'_>, m: &Matrix) -> PyResult<Py<PyAny>> {
        let f = factor_rotation(&m.0, &self.0).map_err(err)?;
        to_py(py, &f.to_json_value())
    }

    fn __repr__(&self) -> String {
        format!("Rotation({})", self.0.to_json_value())
    }
}

/// A *-homomorphism given on generators.
#[pyclass(name = "Hom", module = "ncsphere_py")]
struct Hom(GeneratorMap);

#[pymethods]
impl Hom {
    #[new]
    #[pyo3(signature = (domain, codomain, images, image_x = None))]
    fn new(domain: &PyContext, codomain: &PyContext, images: Vec<String>, image_x: Option<String>) -> PyResult<Self> {
        let refs: Vec<&str> = images.iter().map(String::as_str).collect();
        GeneratorMap::from_strings(&domain.0, &codomain.0, &refs, image_x.as_deref()).map(Hom).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        GeneratorMap::from_json_value(&json_arg(text)?).map(Hom).map_err(err)
    }

    #[staticmethod]
    fn to_even(ctx: &PyContext) -> PyResult<Self> {
        to_even(&ctx.0).map(Hom).map_err(err)
    }

    #[staticmethod]
    fn x_to_zero(ctx: &PyContext) -> PyResult<Self> {
        x_to_zero(&ctx.0).map(Hom).map_err(err)
    }

    #[staticmethod]
    fn kill_zn(ctx: &PyContext) -> PyResult<Self> {
        kill_zn(&ctx.0).map(Hom).map_err(err)
    }

    #[getter]
    fn codomain(&self) -> PyContext {
        PyContext(self.0.codomain().clone())
    }

    #[getter]
    fn validated(&self) -> bool {
        self.0.is_validated()
    }

    /// Checks the defining relations; the report is returned as a dict.
    #[pyo3(signature = (numeric = false, samples = 200, seed = 0))]
    fn validate(&mut self, py: Python<'_>, numeric: bool, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
        let mode = if numeric {
            ValidationMode::Numeric { samples, seed, tolerance: Tolerances::default().eps_rel }
        } else {
            ValidationMode::Symbolic
        };
        let report = self.0.validate(mode).map_err(err)?;
        to_py(py, &report.to_json_value())
    }

    fn apply(&self, py: Python<'_>, x: Operand) -> PyResult<Py<PyAny>> {
        x.into_py(py, |x| {
            Ok(match x {
                Operand::Poly(p) => Operand::Poly(Poly(self.0.apply(&p.0)?)),
                Operand::Matrix(m) => Operand::Matrix(Matrix(self.0.apply_matrix(&m.0)?)),
            })
        })
    }

    fn is_equivariant(&self, domain_action: &Rotation, codomain_action: &Rotation) -> PyResult<bool> {
        self.0.check_equivariance(&domain_action.0, &codomain_action.0).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json_value().to_string()
    }
}

/// Finite-dimensional clock-shift representation for rational angles.
#[pyclass(name = "Rep", module = "ncsphere_py", frozen)]
struct Rep(RationalRep);

#[pymethods]
impl Rep {
    #[new]
    fn new(ctx: &PyContext) -> PyResult<Self> {
        RationalRep::build(ctx.0.rho()).map(Rep).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.q()
    }

    fn relation_residual(&self) -> f64 {
        self.0.relation_residual()
    }

    fn unitarity_residual(&self) -> f64 {
        self.0.unitarity_residual()
    }

    /// Evaluates at the sphere point (t, w, s): z_j ↦ t_j w_j V_j, x ↦ s.
    #[pyo3(signature = (x, t, w, s = None))]
    fn eval(&self, x: Operand, t: Vec<f64>, w: Vec<Complex64>, s: Option<f64>) -> PyResult<Vec<Vec<Complex64>>> {
        let m = match x {
            Operand::Poly(p) => PolyMatrix::new(&p.0.ctx().clone(), 1, 1, vec![p.0]).map_err(err)?,
            Operand::Matrix(m) => m.0,
        };
        let pt = SpherePoint::new(t, w, s).map_err(err)?;
        eval_matrix(&m, &pt, &self.0).map(|e| cmatrix_to_rows(&e)).map_err(err)
    }

    /// Largest operator norm over a t_steps × w_steps grid (a lower bound on the norm).
    fn grid_norm(&self, py: Python<'_>, m: &Matrix, t_steps: usize, w_steps: usize) -> PyResult<Py<PyAny>> {
        let ext = grid_norm(&m.0, &self.0, &GridSpec::new(t_steps, w_steps)).map_err(err)?;
        to_py(py, &ext.to_json_value())
    }
}

/// Winding number of det over a closed loop of sampled matrices.
#[pyfunction]
fn winding(py: Python<'_>, samples: Vec<Vec<Vec<Complex64>>>) -> PyResult<Py<PyAny>> {
    let mats = samples.iter().map(|s| rows_to_cmatrix(s)).collect::<PyResult<Vec<_>>>()?;
    let lp = MatrixLoop::new(mats, true).map_err(err)?;
    to_py(py, &winding_report(&lp, &Tolerances::default()).map_err(err)?.to_json_value())
}

/// Winding number of θ ↦ f(θ) for a Python callable returning a square
/// matrix, refining until two resolutions agree.
#[pyfunction]
#[pyo3(signature = (f, start = 64))]
fn winding_of(py: Python<'_>, f: Py<PyAny>, start: usize) -> PyResult<i64> {
    let sample = |m: usize| -> PyResult<Option<i64>> {
        let mats = (0..m)
            .map(|i| {
                let theta = std::f64::consts::TAU * i as f64 / m as f64;
                let rows: Vec<Vec<Complex64>> = f.call1(py, (theta,))?.extract(py)?;
                rows_to_cmatrix(&rows)
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(MatrixLoop::new(mats, true).ok().and_then(|lp| loop_winding(&lp).ok()))
    };
    let mut m = start.max(8);
    let mut last = sample(m)?;
    for _ in 0..Tolerances::default().max_refinements {
        m *= 2;
        let cur = sample(m)?;
        if let (Some(a), Some(b)) = (last, cur) {
            if a == b {
                return Ok(a);
            }
        }
        last = cur;
    }
    Err(PyValueError::new_err("winding did not stabilize"))
}

/// Square-sum identity and norm bound for the pair (j, k), one-based.
#[pyfunction]
fn counterexample(py: Python<'_>, ctx: &PyContext, j: usize, k: usize) -> PyResult<Py<PyAny>> {
    if j == 0 || k == 0 {
        return Err(PyValueError::new_err("indices are one-based"));
    }
    let ce = counterexample_sum(ctx.0.rho(), j - 1, k - 1).map_err(err)?;
    to_py(py, &ce.to_json_value())
}

/// Runs a seeded verification suite and returns its report.
#[pyfunction]
#[pyo3(signature = (name, seed = 0, trials = 10))]
fn run_suite(py: Python<'_>, name: &str, seed: u64, trials: usize) -> PyResult<Py<PyAny>> {
    let cfg = SuiteConfig { seed, trials, ..SuiteConfig::default() };
    let report = py.detach(|| suites::run(name, &cfg)).map_err(err)?;
    to_py(py, &report.to_json_value())
}

#[pymodule]
fn ncsphere_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyContext>()?;
    m.add_class::<Poly>()?;
    m.add_class::<Matrix>()?;
    m.add_class::<Rotation>()?;
    m.add_class::<Hom>()?;
    m.add_class::<Rep>()?;
    m.add_function(wrap_pyfunction!(winding, m)?)?;
    m.add_function(wrap_pyfunction!(winding_of, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("SUITE_NAMES", suites::SUITE_NAMES.to_vec())?;
    Ok(())
}
