//! Python bindings for the newtonlk library. Matrices cross the boundary as
//! lists of rows, vectors as flat lists; richer results come back as dicts.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use newtonlk::catalog::{AxisKind, ExampleFamily};
use newtonlk::chart::AmbientSpace;
use newtonlk::symfun::{PrincipalCurvatures, ShapeMatrix};
use newtonlk::verify::{self, EvaluationOptions, SampleRecord, SampleSet};

fn to_py_err(e: newtonlk::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let r = rows.len();
    if r == 0 {
        return Err(PyValueError::new_err("matrix must have at least one row"));
    }
    let c = rows[0].len();
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("matrix rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn rows_from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn shape_from_rows(rows: &[Vec<f64>]) -> PyResult<ShapeMatrix> {
    ShapeMatrix::new(matrix_from_rows(rows)?).map_err(to_py_err)
}

/// Elementary symmetric functions `sigma_0..sigma_n` of the given values.
#[pyfunction]
fn elementary_symmetric(values: Vec<f64>) -> Vec<f64> {
    newtonlk::symfun::elementary_symmetric(&values)
}

/// Normalized mean curvatures `H_0..H_n`.
#[pyfunction]
fn mean_curvatures(values: Vec<f64>) -> Vec<f64> {
    newtonlk::symfun::mean_curvatures(&values)
}

#[pyfunction]
fn binomial(n: usize, k: usize) -> f64 {
    newtonlk::symfun::binomial(n, k)
}

/// The constant `c_k = (n-k) C(n,k) = (k+1) C(n,k+1)`.
#[pyfunction]
fn newton_trace_coefficient(n: usize, k: usize) -> f64 {
    newtonlk::symfun::newton_trace_coefficient(n, k)
}

/// Newton transformation `P_k` of a symmetric matrix, as a list of rows.
#[pyfunction]
fn newton_matrix(matrix: Vec<Vec<f64>>, k: usize) -> PyResult<Vec<Vec<f64>>> {
    let shape = shape_from_rows(&matrix)?;
    let p = newtonlk::symfun::newton_matrix(&shape, k).map_err(to_py_err)?;
    Ok(rows_from_matrix(&p))
}

/// Eigenvalues `mu_{i,k}` of `P_k`; curvatures are sorted ascending first and
/// the result matches that order.
#[pyfunction]
fn newton_eigenvalues(values: Vec<f64>, k: usize) -> PyResult<Vec<f64>> {
    let curv = PrincipalCurvatures::new(values).map_err(to_py_err)?;
    newtonlk::symfun::newton_eigenvalues(&curv, k).map_err(to_py_err)
}

/// Traces of `P_k`, `S P_k`, `S^2 P_k` with their closed forms, as a dict.
#[pyfunction]
fn trace_identities<'py>(
    py: Python<'py>,
    matrix: Vec<Vec<f64>>,
    k: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let shape = shape_from_rows(&matrix)?;
    let id = newtonlk::symfun::trace_identities(&shape, k).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("k", id.k)?;
    out.set_item("trace_pk", id.trace_pk)?;
    out.set_item("trace_s_pk", id.trace_s_pk)?;
    out.set_item("trace_s2_pk", id.trace_s2_pk)?;
    out.set_item("closed_trace_pk", id.closed_trace_pk)?;
    out.set_item("closed_trace_s_pk", id.closed_trace_s_pk)?;
    out.set_item("closed_trace_s2_pk", id.closed_trace_s2_pk)?;
    Ok(out)
}

/// Coefficients of `Q_S(t) = sum (-1)^k s_k t^{n-k}`, leading first.
#[pyfunction]
fn characteristic_polynomial(matrix: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    Ok(newtonlk::symfun::characteristic_polynomial(&shape_from_rows(
        &matrix,
    )?))
}

/// Residual of the scalar-curvature identity for ambient sign `c`.
#[pyfunction]
fn scalar_curvature_check(matrix: Vec<Vec<f64>>, c: f64) -> PyResult<f64> {
    Ok(newtonlk::symfun::scalar_curvature_check(
        &shape_from_rows(&matrix)?,
        c,
    ))
}

/// `max |A^T G - G A|` normalized, with `G` the metric of the space form of
/// dimension `n` and curvature sign `c`.
#[pyfunction]
fn selfadjoint_defect(n: usize, c: i32, a: Vec<Vec<f64>>) -> PyResult<f64> {
    let space = AmbientSpace::from_sign(n, c).map_err(to_py_err)?;
    let m = matrix_from_rows(&a)?;
    let d = space.ambient_dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(PyValueError::new_err(format!(
            "matrix must be {d}x{d} for n = {n}"
        )));
    }
    Ok(verify::selfadjoint_defect(&space, &m))
}

/// Geometry of the slice `{<a,x> = tau}` of hyperbolic space, from the causal
/// norm of the axis (1, 0 or -1). Returns a string like "H^n(-r)", "S^n(r)"
/// or "R^n".
#[pyfunction]
fn hyperbolic_slice_type(axis_norm: f64, tau: f64) -> PyResult<String> {
    newtonlk::catalog::hyperbolic_slice_type(axis_norm, tau)
        .map(|t| t.to_string())
        .map_err(to_py_err)
}

fn fit_to_dict<'py>(py: Python<'py>, fit: &verify::AffineFit) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("a_matrix", rows_from_matrix(&fit.a_matrix))?;
    out.set_item("b_vector", fit.b_vector.iter().copied().collect::<Vec<f64>>())?;
    out.set_item("residual_rms", fit.residual_rms)?;
    out.set_item("residual_max", fit.residual_max)?;
    out.set_item("design_rank", fit.design_rank)?;
    out.set_item("design_nullity", fit.design_nullity)?;
    out.set_item("gauge_fixed", fit.gauge_fixed)?;
    out.set_item("constrained", fit.constrained)?;
    out.set_item("selfadjoint_defect", fit.selfadjoint_defect)?;
    Ok(out)
}

/// Fit `L_k x = A x + b` to external samples. `positions` and `lk_positions`
/// are lists of length-(n+2) rows.
#[pyfunction]
#[pyo3(signature = (n, c, positions, lk_positions, constrain_selfadjoint = false))]
fn fit_affine<'py>(
    py: Python<'py>,
    n: usize,
    c: i32,
    positions: Vec<Vec<f64>>,
    lk_positions: Vec<Vec<f64>>,
    constrain_selfadjoint: bool,
) -> PyResult<Bound<'py, PyDict>> {
    if positions.len() != lk_positions.len() {
        return Err(PyValueError::new_err(
            "positions and lk_positions must have the same length",
        ));
    }
    let space = AmbientSpace::from_sign(n, c).map_err(to_py_err)?;
    let records = positions
        .into_iter()
        .zip(lk_positions)
        .map(|(x, y)| SampleRecord {
            u: vec![0.0; n],
            position: DVector::from_vec(x),
            lk_position: DVector::from_vec(y),
        })
        .collect();
    let set = SampleSet::new(n, records).map_err(to_py_err)?;
    let fit = verify::fit_affine(&space, &set, constrain_selfadjoint).map_err(to_py_err)?;
    fit_to_dict(py, &fit)
}

fn parse_axis(axis: &str) -> PyResult<AxisKind> {
    match axis {
        "spacelike" => Ok(AxisKind::Spacelike),
        "timelike" => Ok(AxisKind::Timelike),
        "lightlike" => Ok(AxisKind::Lightlike),
        other => Err(PyValueError::new_err(format!(
            "axis must be spacelike, timelike or lightlike, got {other:?}"
        ))),
    }
}

/// One of the model families with closed-form `L_k x = A x + b`.
#[pyclass]
struct Family {
    inner: ExampleFamily,
}

#[pymethods]
impl Family {
    /// Totally geodesic slice with `H_{k+1} = 0`.
    #[staticmethod]
    fn zero_hk1(n: usize, c: i32) -> PyResult<Self> {
        ExampleFamily::zero_hk1(n, c)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    /// Umbilic cap `{<a,x> = tau}` of the sphere, `|tau| < 1`.
    #[staticmethod]
    fn umbilic_sphere_cap(n: usize, tau: f64) -> PyResult<Self> {
        ExampleFamily::umbilic_sphere_cap(n, tau)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    /// Umbilic slice of hyperbolic space; axis is "spacelike", "timelike" or
    /// "lightlike" and must satisfy `<a,a> + tau^2 > 0`.
    #[staticmethod]
    fn umbilic_hyperbolic(n: usize, axis: &str, tau: f64) -> PyResult<Self> {
        ExampleFamily::umbilic_hyperbolic(n, parse_axis(axis)?, tau)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    /// Standard product of space forms inside the sphere (`0 < r < 1`) or
    /// hyperbolic space (`r > 0`).
    #[staticmethod]
    fn riemannian_product(n: usize, m: usize, radius: f64, c: i32) -> PyResult<Self> {
        ExampleFamily::riemannian_product(n, m, radius, c)
            .map(|inner| Self { inner })
            .map_err(to_py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_owned()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn curvature_sign(&self) -> f64 {
        self.inner.space().curvature_sign()
    }

    fn __repr__(&self) -> String {
        format!(
            "Family({}, n={}, c={})",
            self.inner.name(),
            self.inner.n(),
            self.inner.space().curvature_sign()
        )
    }

    /// The constant principal curvatures, in block order (not sorted).
    fn predicted_curvatures(&self) -> Vec<f64> {
        self.inner.predicted_curvatures()
    }

    fn predicted_hk(&self, k: usize) -> PyResult<f64> {
        self.inner.predicted_hk(k).map_err(to_py_err)
    }

    /// The closed-form `(A, b)` with `L_k x = A x + b`, as (rows, vector).
    fn predicted_affine(&self, k: usize) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
        let affine = self.inner.predicted_affine(k).map_err(to_py_err)?;
        Ok((
            rows_from_matrix(&affine.a_matrix),
            affine.b_vector.iter().copied().collect(),
        ))
    }

    /// Seeded chart samples: returns (u, x, L_k x) as three lists of rows.
    #[pyo3(signature = (k, samples = 200, seed = 1))]
    fn sample(
        &self,
        k: usize,
        samples: usize,
        seed: u64,
    ) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let opts = EvaluationOptions {
            samples,
            seed,
            with_gauss: false,
            with_curvature_gradients: false,
        };
        let evaluated = verify::evaluate_family(&self.inner, k, &opts).map_err(to_py_err)?;
        let mut u = Vec::with_capacity(evaluated.len());
        let mut x = Vec::with_capacity(evaluated.len());
        let mut lkx = Vec::with_capacity(evaluated.len());
        for s in &evaluated {
            u.push(s.frame.u.clone());
            x.push(s.frame.position.iter().copied().collect());
            lkx.push(s.lk_position.generic.iter().copied().collect());
        }
        Ok((u, x, lkx))
    }

    /// Sample the family and fit `(A, b)`, returning the same dict as
    /// `fit_affine`.
    #[pyo3(signature = (k, samples = 200, seed = 1, constrain_selfadjoint = false))]
    fn fit<'py>(
        &self,
        py: Python<'py>,
        k: usize,
        samples: usize,
        seed: u64,
        constrain_selfadjoint: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let opts = EvaluationOptions {
            samples,
            seed,
            with_gauss: false,
            with_curvature_gradients: false,
        };
        let evaluated = verify::evaluate_family(&self.inner, k, &opts).map_err(to_py_err)?;
        let set = verify::to_sample_set(self.inner.n(), &evaluated).map_err(to_py_err)?;
        let fit =
            verify::fit_affine(&self.inner.space(), &set, constrain_selfadjoint).map_err(to_py_err)?;
        fit_to_dict(py, &fit)
    }

    /// Sample the family and run the classification cascade; returns a dict
    /// with the verdict string and the evidence behind it.
    #[pyo3(signature = (k, samples = 50, seed = 1, tol_class = 1e-4))]
    fn classify<'py>(
        &self,
        py: Python<'py>,
        k: usize,
        samples: usize,
        seed: u64,
        tol_class: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let opts = EvaluationOptions {
            samples,
            seed,
            with_gauss: false,
            with_curvature_gradients: false,
        };
        let evaluated = verify::evaluate_family(&self.inner, k, &opts).map_err(to_py_err)?;
        let input = verify::ClassificationInput::from_evaluated(&evaluated);
        let rep = verify::classify(&self.inner.space(), &input, tol_class);
        let out = PyDict::new(py);
        out.set_item("verdict", rep.verdict.as_str())?;
        out.set_item("hk1_abs_mean", rep.hk1_abs_mean)?;
        out.set_item("hk_stddev", rep.hk_stddev)?;
        out.set_item("umbilicity_defect", rep.umbilicity_defect)?;
        out.set_item("quadratic_lambda", rep.quadratic.as_ref().map(|q| q.lambda))?;
        out.set_item("quadratic_defect", rep.quadratic.as_ref().map(|q| q.defect))?;
        out.set_item("cluster_means", rep.cluster_means)?;
        out.set_item("notes", rep.notes)?;
        Ok(out)
    }

    /// The verdict this family should produce, as a string.
    fn expected_verdict(&self) -> String {
        verify::expected_verdict(&self.inner).as_str().to_owned()
    }
}

#[pymodule]
fn newtonlk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(elementary_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(mean_curvatures, m)?)?;
    m.add_function(wrap_pyfunction!(binomial, m)?)?;
    m.add_function(wrap_pyfunction!(newton_trace_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(newton_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(newton_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(trace_identities, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_curvature_check, m)?)?;
    m.add_function(wrap_pyfunction!(selfadjoint_defect, m)?)?;
    m.add_function(wrap_pyfunction!(hyperbolic_slice_type, m)?)?;
    m.add_function(wrap_pyfunction!(fit_affine, m)?)?;
    m.add_class::<Family>()?;
    Ok(())
}
