use std::sync::Arc;

use firstint::catalog;
use firstint::first_integral::{chain_hk, theorem1};
use firstint::normalizer::solve_lambda_mu;
use firstint::numeric::{conservation_check, integrate_trajectory};
use firstint::{is_zero, Domain, Verdict, ZeroTestConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Verdicts cross the boundary as plain dicts with a `kind` key, the same
/// shape the CLI's JSON reports use.
fn verdict_dict<'py>(py: Python<'py>, v: &Verdict) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    match v {
        Verdict::ProvenZero => d.set_item("kind", "ProvenZero")?,
        Verdict::ProvenNonzero { witness } => {
            d.set_item("kind", "ProvenNonzero")?;
            d.set_item("witness", witness.clone())?;
        }
        Verdict::NumericZero {
            sample_count,
            max_abs_residual,
            threshold,
        } => {
            d.set_item("kind", "NumericZero")?;
            d.set_item("sample_count", sample_count)?;
            d.set_item("max_abs_residual", max_abs_residual)?;
            d.set_item("threshold", threshold)?;
        }
    }
    Ok(d)
}

/// A canonical expression together with the variable names it lives over.
#[pyclass(name = "Expr", module = "pyfirstint", frozen, from_py_object)]
#[derive(Clone)]
struct PyExpr {
    inner: firstint::Expr,
    vars: Arc<Vec<String>>,
}

impl PyExpr {
    fn wrap(&self, inner: firstint::Expr) -> PyExpr {
        PyExpr {
            inner,
            vars: self.vars.clone(),
        }
    }

    fn same_vars(&self, other: &PyExpr) -> PyResult<()> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(PyValueError::new_err("expressions use different variable lists"))
        }
    }
}

#[pymethods]
impl PyExpr {
    #[new]
    fn new(text: &str, vars: Vec<String>) -> PyResult<Self> {
        let inner = firstint::parse_expr(text, &vars).map_err(value_error)?;
        Ok(PyExpr {
            inner,
            vars: Arc::new(vars),
        })
    }

    #[getter]
    fn vars(&self) -> Vec<String> {
        self.vars.to_vec()
    }

    fn evaluate(&self, point: Vec<f64>) -> PyResult<f64> {
        if point.len() != self.vars.len() {
            return Err(PyValueError::new_err(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                self.vars.len()
            )));
        }
        self.inner.evaluate(&point).map_err(value_error)
    }

    /// Partial derivative with respect to the named variable.
    fn diff(&self, var: &str) -> PyResult<PyExpr> {
        let v = self
            .vars
            .iter()
            .position(|n| n == var)
            .ok_or_else(|| PyValueError::new_err(format!("unknown variable {var}")))?;
        Ok(self.wrap(self.inner.diff(v)))
    }

    /// Zero test on the box `[-1,1]ⁿ`.
    #[pyo3(signature = (samples = 64, seed = 0))]
    fn is_zero<'py>(&self, py: Python<'py>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let cfg = ZeroTestConfig {
            samples,
            seed,
            ..ZeroTestConfig::default()
        };
        let v = is_zero(&self.inner, &Domain::unit(self.vars.len()), &cfg).map_err(value_error)?;
        verdict_dict(py, &v)
    }

    fn __add__(&self, other: &PyExpr) -> PyResult<PyExpr> {
        self.same_vars(other)?;
        Ok(self.wrap(&self.inner + &other.inner))
    }

    fn __sub__(&self, other: &PyExpr) -> PyResult<PyExpr> {
        self.same_vars(other)?;
        Ok(self.wrap(&self.inner - &other.inner))
    }

    fn __mul__(&self, other: &PyExpr) -> PyResult<PyExpr> {
        self.same_vars(other)?;
        Ok(self.wrap(&self.inner * &other.inner))
    }

    fn __truediv__(&self, other: &PyExpr) -> PyResult<PyExpr> {
        self.same_vars(other)?;
        self.inner
            .checked_div(&other.inner)
            .map(|e| self.wrap(e))
            .map_err(value_error)
    }

    fn __neg__(&self) -> PyExpr {
        self.wrap(-&self.inner)
    }

    fn __eq__(&self, other: &PyExpr) -> bool {
        self.vars == other.vars && self.inner == other.inner
    }

    fn __str__(&self) -> String {
        firstint::print_expr(&self.inner, &self.vars)
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.__str__())
    }
}

#[pyclass(name = "Problem", module = "pyfirstint", frozen)]
struct PyProblem {
    inner: firstint::Problem,
}

impl PyProblem {
    fn expr(&self, e: firstint::Expr) -> PyExpr {
        PyExpr {
            inner: e,
            vars: self.inner.vars.clone(),
        }
    }

    fn parse_opt(&self, text: Option<&str>) -> PyResult<Option<firstint::Expr>> {
        text.map(|t| self.inner.parse(t).map_err(value_error)).transpose()
    }

    fn cfg(&self) -> ZeroTestConfig {
        ZeroTestConfig {
            seed: self.inner.seed,
            ..ZeroTestConfig::default()
        }
    }

    /// `λ, μ` from the arguments, then the file, then the solver.
    fn relation(&self, lambda: Option<&str>, mu: Option<&str>) -> PyResult<(firstint::Expr, firstint::Expr)> {
        let p = &self.inner;
        let y = p.y.as_ref().ok_or_else(|| PyValueError::new_err("problem has no Y"))?;
        let mut l = self.parse_opt(lambda)?.or_else(|| p.lambda.clone());
        let mut m = self.parse_opt(mu)?.or_else(|| p.mu.clone());
        if l.is_none() || m.is_none() {
            let mut d = p.domain.clone();
            if let Some(f) = &p.f {
                d = d.excluding(f.clone());
            }
            let sol = solve_lambda_mu(&p.x, y, &d, &self.cfg()).map_err(value_error)?;
            l = l.or(Some(sol.lambda));
            m = m.or(Some(sol.mu));
        }
        Ok((l.unwrap(), m.unwrap()))
    }
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        firstint::parse_problem(text)
            .map(|inner| PyProblem { inner })
            .map_err(value_error)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        firstint::load_problem(path)
            .map(|inner| PyProblem { inner })
            .map_err(value_error)
    }

    #[getter]
    fn vars(&self) -> Vec<String> {
        self.inner.vars.to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn x(&self) -> Vec<PyExpr> {
        self.inner.x.components().iter().map(|c| self.expr(c.clone())).collect()
    }

    #[getter]
    fn f(&self) -> Option<PyExpr> {
        self.inner.f.clone().map(|e| self.expr(e))
    }

    fn parse(&self, text: &str) -> PyResult<PyExpr> {
        self.inner.parse(text).map(|e| self.expr(e)).map_err(value_error)
    }

    fn to_text(&self) -> String {
        firstint::parser::write_problem(&self.inner)
    }

    /// Builds `H` from `X, Y, f` and reports every verdict.
    #[pyo3(signature = (lambda_ = None, mu = None))]
    fn first_integral<'py>(
        &self,
        py: Python<'py>,
        lambda_: Option<&str>,
        mu: Option<&str>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let p = &self.inner;
        let (l, m) = self.relation(lambda_, mu)?;
        let f = p.f.as_ref().ok_or_else(|| PyValueError::new_err("problem has no f"))?;
        let r = theorem1(
            &p.x,
            p.y.as_ref().unwrap(),
            f,
            &l,
            &m,
            &p.volume,
            &p.domain,
            &self.cfg(),
        )
        .map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("H", self.expr(r.h).into_pyobject(py)?)?;
        d.set_item("g", self.expr(r.g).into_pyobject(py)?)?;
        d.set_item("lambda", self.expr(l).into_pyobject(py)?)?;
        d.set_item("mu", self.expr(m).into_pyobject(py)?)?;
        d.set_item(
            "integrating_factor",
            verdict_dict(py, &r.hypotheses.integrating_factor)?,
        )?;
        d.set_item("mu_factor", verdict_dict(py, &r.hypotheses.mu_factor)?)?;
        d.set_item("relation", verdict_dict(py, &r.hypotheses.relation)?)?;
        d.set_item("conclusion", verdict_dict(py, &r.conclusion)?)?;
        d.set_item("trivial", verdict_dict(py, &r.trivial)?)?;
        Ok(d)
    }

    /// `H₁ … H_k` with `H_j = L_Y H_{j−1}`, each paired with its verdict.
    #[pyo3(signature = (h, k = 1))]
    fn chain<'py>(&self, py: Python<'py>, h: &PyExpr, k: usize) -> PyResult<Vec<(PyExpr, Bound<'py, PyDict>)>> {
        let p = &self.inner;
        let y = p.y.as_ref().ok_or_else(|| PyValueError::new_err("problem has no Y"))?;
        let steps =
            chain_hk(&p.x, y, &h.inner, &firstint::Expr::zero(), k, &p.domain, &self.cfg()).map_err(value_error)?;
        steps
            .into_iter()
            .map(|s| Ok((self.expr(s.h), verdict_dict(py, &s.verdict)?)))
            .collect()
    }

    /// RK4 path of `X` from `start`; returns `(times, points)`.
    #[pyo3(signature = (start, t_end = 1.0, step = 1e-3))]
    fn integrate(&self, start: Vec<f64>, t_end: f64, step: f64) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let t = integrate_trajectory(&self.inner.x, &start, t_end, step).map_err(value_error)?;
        Ok((t.times, t.points))
    }

    /// Largest relative drift of `h` along the RK4 path from `start`.
    #[pyo3(signature = (h, start, t_end = 1.0, step = 1e-3))]
    fn drift(&self, h: &PyExpr, start: Vec<f64>, t_end: f64, step: f64) -> PyResult<f64> {
        let t = integrate_trajectory(&self.inner.x, &start, t_end, step).map_err(value_error)?;
        Ok(conservation_check(&h.inner, &t, 0.0).max_drift)
    }
}

#[pyfunction]
fn example5() -> PyProblem {
    PyProblem {
        inner: catalog::example5().problem,
    }
}

#[pyfunction]
#[pyo3(signature = (n, alpha = "1"))]
fn hamiltonian(n: usize, alpha: &str) -> PyResult<PyProblem> {
    let a = firstint::parse_expr(alpha, &[])
        .map_err(value_error)?
        .as_constant()
        .cloned()
        .ok_or_else(|| PyValueError::new_err(format!("alpha must be a rational number, got '{alpha}'")))?;
    let inst = catalog::hamiltonian_homogeneous(n, a).map_err(value_error)?;
    Ok(PyProblem {
        inner: inst.to_problem(),
    })
}

#[pyfunction]
#[pyo3(signature = (seed, dim = 2, degree = 2))]
fn random_instance(seed: u64, dim: usize, degree: usize) -> PyResult<PyProblem> {
    let inst = catalog::random_instance(seed, dim, degree).map_err(value_error)?;
    Ok(PyProblem { inner: inst.problem })
}

/// Runs the command-line tool in-process: `run(["first-integral", path])`
/// returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    let out = firstint::cli::run(std::iter::once("firstint".to_string()).chain(args));
    (out.exit_code, out.stdout, out.stderr)
}

#[pymodule]
fn pyfirstint(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(example5, m)?)?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(random_instance, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
