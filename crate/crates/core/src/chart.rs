//! Local charts on hypersurfaces of the sphere and of hyperbolic space.
//!
//! A hypersurface `M^n` lives inside the unit quadric of `R^{n+2}`: the round
//! sphere `S^{n+1}` (`<x,x> = 1`, Euclidean metric) or the upper sheet of the
//! hyperboloid model of `H^{n+1}` (`<x,x> = -1`, `x_0 > 0`, Lorentz metric
//! `diag(-1, 1, .., 1)`). A [`Surface`] supplies the parametrization; the
//! [`Chart`] wrapper differentiates it (closed-form when supplied, central
//! differences otherwise) and assembles frames: induced metric, unit normal,
//! second fundamental form, shape operator, principal curvatures and
//! Christoffel symbols.
//!
//! Index conventions: chart indices `i, j, k` run over `0..n`; ambient
//! coordinates over `0..n+2`. The second fundamental form is
//! `h_ij = <∂_i∂_j x, N>` and the shape operator the mixed tensor
//! `S = g^{-1} h`, so principal curvatures solve the pencil `h v = κ g v`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numdiff;
use crate::symfun::{CurvatureProfile, PrincipalCurvatures};
use crate::tol;

/// The two ambient space forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceForm {
    /// `S^{n+1}` in Euclidean `R^{n+2}`, curvature `c = +1`.
    Sphere,
    /// `H^{n+1}` in Lorentz `R^{n+2}_1`, curvature `c = -1`.
    Hyperbolic,
}

/// Ambient space form for an `n`-dimensional hypersurface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmbientSpace {
    n: usize,
    form: SpaceForm,
}

impl AmbientSpace {
    pub fn new(n: usize, form: SpaceForm) -> Result<Self> {
        if !(2..=crate::symfun::MAX_DIM).contains(&n) {
            return Err(Error::DimensionOutOfRange { n });
        }
        Ok(Self { n, form })
    }

    pub fn sphere(n: usize) -> Result<Self> {
        Self::new(n, SpaceForm::Sphere)
    }

    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::new(n, SpaceForm::Hyperbolic)
    }

    /// Build from the curvature sign `c ∈ {+1, -1}`.
    pub fn from_sign(n: usize, c: i32) -> Result<Self> {
        match c {
            1 => Self::sphere(n),
            -1 => Self::hyperbolic(n),
            _ => Err(Error::Inadmissible(format!(
                "curvature sign must be +1 or -1, got {c}"
            ))),
        }
    }

    pub fn form(&self) -> SpaceForm {
        self.form
    }

    /// Hypersurface dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Ambient linear dimension `n + 2`.
    pub fn ambient_dim(&self) -> usize {
        self.n + 2
    }

    /// Curvature sign `c` of the space form containing the hypersurface.
    pub fn curvature_sign(&self) -> f64 {
        match self.form {
            SpaceForm::Sphere => 1.0,
            SpaceForm::Hyperbolic => -1.0,
        }
    }

    /// Diagonal of the ambient metric tensor.
    pub fn metric_diagonal(&self) -> DVector<f64> {
        let mut d = DVector::from_element(self.ambient_dim(), 1.0);
        if self.form == SpaceForm::Hyperbolic {
            d[0] = -1.0;
        }
        d
    }

    /// Ambient inner product (Euclidean or Lorentzian).
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let mut acc = u.dot(v);
        if self.form == SpaceForm::Hyperbolic {
            acc -= 2.0 * u[0] * v[0];
        }
        acc
    }

    /// `<x,x> - c`, the defect of the quadric constraint.
    pub fn constraint_defect(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x) - self.curvature_sign()
    }

    /// Check that `x` sits on the quadric (and on the upper sheet for the
    /// hyperbolic model).
    pub fn check_point(&self, x: &DVector<f64>, tol: f64) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::BadShape {
                rows: x.len(),
                cols: 1,
                expected: self.ambient_dim(),
            });
        }
        let defect = self.constraint_defect(x).abs();
        if !defect.is_finite() || defect > tol {
            return Err(Error::OffManifold { defect });
        }
        if self.form == SpaceForm::Hyperbolic && x[0] <= 0.0 {
            return Err(Error::OffManifold { defect: x[0] });
        }
        Ok(())
    }
}

/// Second derivatives `∂_i∂_j x` of a parametrization, stored densely.
#[derive(Debug, Clone)]
pub struct SecondDerivatives {
    n: usize,
    vecs: Vec<DVector<f64>>,
}

impl SecondDerivatives {
    /// Build from a generator called once per unordered pair `i <= j`.
    pub fn build<F: FnMut(usize, usize) -> DVector<f64>>(n: usize, mut gen: F) -> Self {
        let mut vecs = vec![DVector::zeros(0); n * n];
        for i in 0..n {
            for j in i..n {
                let v = gen(i, j);
                vecs[i * n + j] = v.clone();
                vecs[j * n + i] = v;
            }
        }
        Self { n, vecs }
    }

    pub fn get(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.vecs[i * self.n + j]
    }
}

/// A parametrized hypersurface patch. Implementations may supply closed-form
/// derivatives; when they do not, the chart falls back to central
/// differences.
pub trait Surface: Send + Sync {
    /// Intrinsic dimension `n`.
    fn dim(&self) -> usize;

    fn space(&self) -> AmbientSpace;

    /// Ambient position `x(u)`, a point of the quadric.
    fn position(&self, u: &[f64]) -> DVector<f64>;

    /// Closed-form Jacobian (columns `∂_i x`), if available.
    fn jacobian(&self, _u: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Closed-form second derivatives, if available.
    fn second_derivatives(&self, _u: &[f64]) -> Option<SecondDerivatives> {
        None
    }

    /// Ambient vector with positive inner product against the desired
    /// orientation of the normal at `x(u)`.
    fn orientation_hint(&self, u: &[f64], x: &DVector<f64>) -> DVector<f64>;
}

/// Closure-backed surface with numeric derivatives and a fixed orientation
/// reference vector. Handy for tests and ad-hoc geometries.
pub struct FnSurface {
    n: usize,
    space: AmbientSpace,
    position: Box<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>,
    orientation: DVector<f64>,
}

impl FnSurface {
    pub fn new<F>(space: AmbientSpace, position: F, orientation: DVector<f64>) -> Self
    where
        F: Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            n: space.dim(),
            space,
            position: Box::new(position),
            orientation,
        }
    }
}

impl Surface for FnSurface {
    fn dim(&self) -> usize {
        self.n
    }

    fn space(&self) -> AmbientSpace {
        self.space
    }

    fn position(&self, u: &[f64]) -> DVector<f64> {
        (self.position)(u)
    }

    fn orientation_hint(&self, _u: &[f64], _x: &DVector<f64>) -> DVector<f64> {
        self.orientation.clone()
    }
}

/// Whether to trust closed-form derivatives when the surface has them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    /// Closed-form derivatives when supplied, numeric otherwise.
    #[default]
    Auto,
    /// Ignore closed forms and always difference numerically. Useful for
    /// cross-checking the analytic derivative code.
    Numeric,
}

/// Everything the rest of the crate needs about one point of a hypersurface.
#[derive(Debug, Clone)]
pub struct FrameData {
    pub u: Vec<f64>,
    pub space: AmbientSpace,
    /// Ambient position `x`.
    pub position: DVector<f64>,
    /// Columns `∂_i x`, an `(n+2) x n` matrix.
    pub tangents: DMatrix<f64>,
    /// Induced metric `g_ij` (positive definite).
    pub metric: DMatrix<f64>,
    pub metric_inverse: DMatrix<f64>,
    /// Oriented unit normal.
    pub normal: DVector<f64>,
    /// Sign applied to the raw null-space normal to satisfy the hint.
    pub orientation_sign: f64,
    /// Second fundamental form `h_ij`.
    pub second_fundamental: DMatrix<f64>,
    /// Shape operator `g^{-1} h` in the chart basis.
    pub shape_operator: DMatrix<f64>,
    /// Principal curvatures, ascending.
    pub curvatures: PrincipalCurvatures,
    /// Columns are g-orthonormal principal directions matching
    /// `curvatures.values()` (chart-basis components).
    pub principal_directions: DMatrix<f64>,
    /// Christoffel symbols: `christoffel[k][(i,j)] = Γ^k_ij`.
    pub christoffel: Vec<DMatrix<f64>>,
    /// Second derivatives `∂_i∂_j x` used to build the frame.
    pub second_derivatives: SecondDerivatives,
}

impl FrameData {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn profile(&self) -> CurvatureProfile {
        self.curvatures.profile()
    }

    /// Project an ambient vector onto the tangent space:
    /// `v - <v,N> N - c <v,x> x`.
    pub fn tangential_projection(&self, v: &DVector<f64>) -> DVector<f64> {
        let c = self.space.curvature_sign();
        let vn = self.space.inner(v, &self.normal);
        let vx = self.space.inner(v, &self.position);
        v - &self.normal * vn - &self.position * (c * vx)
    }

    /// Raise chart partials `∂_i f` to the ambient gradient
    /// `Σ g^{ij} (∂_j f) ∂_i x`.
    pub fn ambient_gradient(&self, partials: &DVector<f64>) -> DVector<f64> {
        &self.tangents * (&self.metric_inverse * partials)
    }
}

/// Scalar field on the hypersurface, by chart composition or as the
/// restriction of an ambient function.
pub enum ScalarField<'a> {
    /// `f(u)` directly in chart coordinates.
    Chart(&'a (dyn Fn(&[f64]) -> Result<f64> + Sync)),
    /// `f(x)` evaluated at `x(u)`.
    Ambient(&'a (dyn Fn(&DVector<f64>) -> Result<f64> + Sync)),
    /// The height function `<a, x>` for a fixed ambient vector `a`; its chart
    /// derivatives come from the parametrization's own derivatives, so no
    /// extra stencil is spent on it.
    LinearAmbient(DVector<f64>),
}

/// Value, chart partials and Hessians of a scalar field at one point.
#[derive(Debug, Clone)]
pub struct ScalarHessian {
    pub value: f64,
    /// `∂_i f`.
    pub partials: DVector<f64>,
    /// Plain coordinate second partials `∂_i∂_j f`.
    pub coordinate_hessian: DMatrix<f64>,
    /// Covariant Hessian `(∇²f)_ij = ∂_i∂_j f - Γ^k_ij ∂_k f` (lowered).
    pub covariant_hessian: DMatrix<f64>,
}

/// A surface plus a derivative policy.
#[derive(Clone)]
pub struct Chart {
    surface: Arc<dyn Surface>,
    mode: DerivativeMode,
}

impl Chart {
    pub fn new(surface: Arc<dyn Surface>) -> Self {
        Self {
            surface,
            mode: DerivativeMode::Auto,
        }
    }

    pub fn with_mode(surface: Arc<dyn Surface>, mode: DerivativeMode) -> Self {
        Self { surface, mode }
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.surface.dim()
    }

    pub fn space(&self) -> AmbientSpace {
        self.surface.space()
    }

    /// Position with constraint checking.
    pub fn position(&self, u: &[f64]) -> Result<DVector<f64>> {
        self.check_u(u)?;
        let x = self.surface.position(u);
        self.space().check_point(&x, tol::CONSTRAINT_ABS)?;
        Ok(x)
    }

    fn check_u(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::BadShape {
                rows: u.len(),
                cols: 1,
                expected: self.dim(),
            });
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "chart coordinates".into(),
            });
        }
        Ok(())
    }

    /// Tangent columns `∂_i x`.
    pub fn tangents(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.check_u(u)?;
        if self.mode == DerivativeMode::Auto {
            if let Some(jac) = self.surface.jacobian(u) {
                return Ok(jac);
            }
        }
        let surf = &self.surface;
        let f = |v: &[f64]| -> Result<DVector<f64>> { Ok(surf.position(v)) };
        numdiff::jacobian(&f, u, self.space().ambient_dim(), numdiff::first_step(u))
    }

    fn second_derivatives(&self, u: &[f64]) -> Result<SecondDerivatives> {
        if self.mode == DerivativeMode::Auto {
            if let Some(sec) = self.surface.second_derivatives(u) {
                return Ok(sec);
            }
        }
        let surf = &self.surface;
        let f = |v: &[f64]| -> Result<DVector<f64>> { Ok(surf.position(v)) };
        let (_, hessians) = numdiff::partials_and_hessians(
            &f,
            u,
            self.space().ambient_dim(),
            numdiff::second_step(u),
        )?;
        // hessians are indexed by ambient coordinate; regroup by chart pair
        let n = self.dim();
        Ok(SecondDerivatives::build(n, |i, j| {
            DVector::from_iterator(
                self.space().ambient_dim(),
                hessians.iter().map(|hc| hc[(i, j)]),
            )
        }))
    }

    /// The oriented unit normal alone (cheaper than a full frame; used in
    /// stencils that differentiate the Gauss map).
    pub fn gauss_map(&self, u: &[f64]) -> Result<DVector<f64>> {
        let x = self.position(u)?;
        let jac = self.tangents(u)?;
        let (normal, _) = self.normal_from(u, &x, &jac)?;
        Ok(normal)
    }

    fn normal_from(
        &self,
        u: &[f64],
        x: &DVector<f64>,
        jac: &DMatrix<f64>,
    ) -> Result<(DVector<f64>, f64)> {
        let space = self.space();
        let d = space.ambient_dim();
        let gdiag = space.metric_diagonal();

        // Rows span the metric duals of x and of the tangents; the normal is
        // the (Euclidean) null direction of this (n+1) x (n+2) system,
        // recovered from a full SVD of the zero-padded square matrix.
        let mut pairing = DMatrix::zeros(d, d);
        for c in 0..d {
            pairing[(0, c)] = gdiag[c] * x[c];
        }
        for r in 0..self.dim() {
            for c in 0..d {
                pairing[(r + 1, c)] = gdiag[c] * jac[(c, r)];
            }
        }
        let svd = pairing.svd(true, true);
        let v_t = svd.v_t.as_ref().expect("svd with vectors requested");
        let raw = v_t.row(d - 1).transpose();

        let norm2 = space.inner(&raw, &raw);
        if !(norm2.is_finite() && norm2 > 0.0) {
            return Err(Error::DegenerateChart {
                reason: "normal direction is not spacelike".into(),
            });
        }
        let unit = raw / norm2.sqrt();
        let hint = self.surface.orientation_hint(u, x);
        let alignment = space.inner(&unit, &hint);
        if alignment == 0.0 || !alignment.is_finite() {
            return Err(Error::OrientationAmbiguous);
        }
        let sign = alignment.signum();
        Ok((unit * sign, sign))
    }

    /// Full frame at `u`.
    pub fn frame(&self, u: &[f64]) -> Result<FrameData> {
        let space = self.space();
        let n = self.dim();
        let x = self.position(u)?;
        let jac = self.tangents(u)?;
        if jac.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "chart tangents".into(),
            });
        }

        // induced metric g = J^T G J
        let gdiag = space.metric_diagonal();
        let mut metric = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for c in 0..space.ambient_dim() {
                    acc += gdiag[c] * jac[(c, i)] * jac[(c, j)];
                }
                metric[(i, j)] = acc;
                metric[(j, i)] = acc;
            }
        }

        let chol = nalgebra::Cholesky::new(metric.clone()).ok_or_else(|| {
            Error::DegenerateChart {
                reason: "induced metric is not positive definite".into(),
            }
        })?;
        let eigs = metric.clone().symmetric_eigen().eigenvalues;
        let (gmin, gmax) = eigs
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        if !(gmin > 0.0) || gmax / gmin > tol::COND_LIMIT {
            return Err(Error::DegenerateChart {
                reason: format!("induced metric condition number {:.3e}", gmax / gmin),
            });
        }
        let metric_inverse = chol.inverse();

        let second = self.second_derivatives(u)?;
        let (normal, orientation_sign) = self.normal_from(u, &x, &jac)?;

        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = space.inner(second.get(i, j), &normal);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }

        // principal curvatures from the pencil h v = κ g v via the Cholesky
        // congruence M = L^{-1} h L^{-T}
        let l = chol.l();
        let y = l
            .solve_lower_triangular(&h)
            .ok_or_else(|| Error::DegenerateChart {
                reason: "metric Cholesky factor is singular".into(),
            })?;
        let m = l
            .solve_lower_triangular(&y.transpose())
            .ok_or_else(|| Error::DegenerateChart {
                reason: "metric Cholesky factor is singular".into(),
            })?;
        let m = (&m + m.transpose()) * 0.5;
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let kappa: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut w = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            w.set_column(col, &eig.eigenvectors.column(i));
        }
        let lt = l.transpose();
        let principal_directions =
            lt.solve_upper_triangular(&w)
                .ok_or_else(|| Error::DegenerateChart {
                    reason: "metric Cholesky factor is singular".into(),
                })?;
        let curvatures = PrincipalCurvatures::new(kappa)?;

        let shape_operator = chol.solve(&h);

        // Γ^k_ij from the Gauss formula: <∂_i∂_j x, ∂_l x> = Γ^k_ij g_kl
        let mut christoffel = vec![DMatrix::zeros(n, n); n];
        for i in 0..n {
            for j in i..n {
                let mut rhs = DVector::zeros(n);
                for lix in 0..n {
                    let mut acc = 0.0;
                    let sec = second.get(i, j);
                    for c in 0..space.ambient_dim() {
                        acc += gdiag[c] * sec[c] * jac[(c, lix)];
                    }
                    rhs[lix] = acc;
                }
                let gamma = chol.solve(&rhs);
                for kx in 0..n {
                    christoffel[kx][(i, j)] = gamma[kx];
                    christoffel[kx][(j, i)] = gamma[kx];
                }
            }
        }

        Ok(FrameData {
            u: u.to_vec(),
            space,
            position: x,
            tangents: jac,
            metric,
            metric_inverse,
            normal,
            orientation_sign,
            second_fundamental: h,
            shape_operator,
            curvatures,
            principal_directions,
            christoffel,
            second_derivatives: second,
        })
    }

    /// Value, partials and Hessians of a scalar field at a point whose frame
    /// is already known.
    pub fn scalar_hessian(
        &self,
        frame: &FrameData,
        field: &ScalarField<'_>,
    ) -> Result<ScalarHessian> {
        let n = self.dim();
        let u = &frame.u;
        let (value, partials, coordinate_hessian) = match field {
            ScalarField::LinearAmbient(a) => {
                if a.len() != self.space().ambient_dim() {
                    return Err(Error::BadShape {
                        rows: a.len(),
                        cols: 1,
                        expected: self.space().ambient_dim(),
                    });
                }
                let value = self.space().inner(a, &frame.position);
                let mut partials = DVector::zeros(n);
                for i in 0..n {
                    let col = frame.tangents.column(i).clone_owned();
                    partials[i] = self.space().inner(a, &col);
                }
                let mut hess = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let v = self.space().inner(a, frame.second_derivatives.get(i, j));
                        hess[(i, j)] = v;
                        hess[(j, i)] = v;
                    }
                }
                (value, partials, hess)
            }
            ScalarField::Chart(fun) => {
                let value = fun(u)?;
                let wrapped =
                    |v: &[f64]| -> Result<DVector<f64>> { Ok(DVector::from_element(1, fun(v)?)) };
                let (p, hs) =
                    numdiff::partials_and_hessians(&wrapped, u, 1, numdiff::second_step(u))?;
                (value, p.row(0).transpose(), hs.into_iter().next().unwrap())
            }
            ScalarField::Ambient(fun) => {
                let value = fun(&frame.position)?;
                let wrapped = |v: &[f64]| -> Result<DVector<f64>> {
                    Ok(DVector::from_element(1, fun(&self.position(v)?)?))
                };
                let (p, hs) =
                    numdiff::partials_and_hessians(&wrapped, u, 1, numdiff::second_step(u))?;
                (value, p.row(0).transpose(), hs.into_iter().next().unwrap())
            }
        };

        let mut covariant = coordinate_hessian.clone();
        for i in 0..n {
            for j in 0..n {
                let mut corr = 0.0;
                for kx in 0..n {
                    corr += frame.christoffel[kx][(i, j)] * partials[kx];
                }
                covariant[(i, j)] -= corr;
            }
        }

        Ok(ScalarHessian {
            value,
            partials,
            coordinate_hessian,
            covariant_hessian: covariant,
        })
    }
}
