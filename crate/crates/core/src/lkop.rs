//! The linearized operators `L_k f = tr(P_k ∘ ∇²f)`.
//!
//! Everything here evaluates pointwise on a [`FrameData`]. The trace is
//! taken in the pencil eigenbasis: with `g`-orthonormal principal
//! directions `v_i` and the reduced symmetric functions `μ_{i,k}` of the
//! principal curvatures,
//!
//! ```text
//! L_k f = Σ_i μ_{i,k} · v_iᵀ (∇²f) v_i .
//! ```
//!
//! For the position and Gauss maps two independent routes are computed: the
//! generic trace above applied componentwise, and the closed-form right
//! hand sides
//!
//! ```text
//! L_k x = c_k H_{k+1} N − c c_k H_k x
//! L_k N = −C(n,k+1) ∇H_{k+1}
//!         − C(n,k+1) (n H_1 H_{k+1} − (n−k−1) H_{k+2}) N
//!         + c (k+1) C(n,k+1) H_{k+1} x ,
//! ```
//!
//! returned side by side with their relative discrepancy so callers can
//! cross-check rather than trust either path alone.

use nalgebra::{DMatrix, DVector};

use crate::chart::{Chart, FrameData, ScalarField};
use crate::error::{Error, Result};
use crate::numdiff;
use crate::symfun;

/// One quantity computed along two independent routes.
#[derive(Debug, Clone)]
pub struct DualVector {
    /// Componentwise trace through the generic machinery.
    pub generic: DVector<f64>,
    /// Closed-form right hand side.
    pub closed_form: DVector<f64>,
    /// `‖generic − closed‖ / (1 + ‖closed‖)`.
    pub discrepancy: f64,
}

impl DualVector {
    fn new(generic: DVector<f64>, closed_form: DVector<f64>) -> Self {
        let discrepancy = (&generic - &closed_form).norm() / (1.0 + closed_form.norm());
        Self {
            generic,
            closed_form,
            discrepancy,
        }
    }
}

fn check_order(frame: &FrameData, k: usize) -> Result<()> {
    let n = frame.dim();
    if k + 1 > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    Ok(())
}

/// `L_k f` from an already-computed covariant Hessian (lowered indices).
pub fn lk_from_hessian(frame: &FrameData, covariant_hessian: &DMatrix<f64>, k: usize) -> Result<f64> {
    check_order(frame, k)?;
    let n = frame.dim();
    if covariant_hessian.nrows() != n || covariant_hessian.ncols() != n {
        return Err(Error::BadShape {
            rows: covariant_hessian.nrows(),
            cols: covariant_hessian.ncols(),
            expected: n,
        });
    }
    let mu = symfun::newton_eigenvalues(&frame.curvatures, k)?;
    let mut acc = 0.0;
    for i in 0..n {
        let v = frame.principal_directions.column(i);
        acc += mu[i] * (covariant_hessian * v).dot(&v.clone_owned());
    }
    Ok(acc)
}

/// `L_k f` for a scalar field, differentiating through the chart.
pub fn lk_scalar(chart: &Chart, frame: &FrameData, field: &ScalarField<'_>, k: usize) -> Result<f64> {
    let hess = chart.scalar_hessian(frame, field)?;
    lk_from_hessian(frame, &hess.covariant_hessian, k)
}

/// `<P_k ∇f, ∇g>` from chart partials of the two fields. This is the
/// first-order term of the product rule
/// `L_k(fg) = (L_k f) g + f (L_k g) + 2 <P_k ∇f, ∇g>`.
pub fn pk_gradient_pairing(
    frame: &FrameData,
    k: usize,
    df: &DVector<f64>,
    dg: &DVector<f64>,
) -> Result<f64> {
    check_order(frame, k)?;
    let n = frame.dim();
    if df.len() != n || dg.len() != n {
        return Err(Error::BadShape {
            rows: df.len().max(dg.len()),
            cols: 1,
            expected: n,
        });
    }
    let mu = symfun::newton_eigenvalues(&frame.curvatures, k)?;
    let mut acc = 0.0;
    for i in 0..n {
        let v = frame.principal_directions.column(i);
        acc += mu[i] * v.dot(df) * v.dot(dg);
    }
    Ok(acc)
}

/// Chart partials and ambient (tangent) gradient of `H_order` around a
/// point, by central differences of nearby frames.
pub fn curvature_gradient(
    chart: &Chart,
    frame: &FrameData,
    order: usize,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let u = &frame.u;
    let f = |v: &[f64]| -> Result<DVector<f64>> {
        let fr = chart.frame(v)?;
        Ok(DVector::from_element(1, fr.profile().h(order)))
    };
    let partials = numdiff::jacobian(&f, u, 1, numdiff::first_step(u))?
        .row(0)
        .transpose();
    let ambient = frame.ambient_gradient(&partials);
    Ok((partials, ambient))
}

/// `L_k` applied to every ambient coordinate of the position, along both
/// routes.
pub fn lk_position(chart: &Chart, frame: &FrameData, k: usize) -> Result<DualVector> {
    check_order(frame, k)?;
    let n = frame.dim();
    let d = chart.space().ambient_dim();
    let metric = chart.space().metric_diagonal();

    let mut generic = DVector::zeros(d);
    for c in 0..d {
        // <G e_c, x>_G = x_c, so the coordinate function is a height field.
        let mut a = DVector::zeros(d);
        a[c] = metric[c];
        let hess = chart.scalar_hessian(frame, &ScalarField::LinearAmbient(a))?;
        generic[c] = lk_from_hessian(frame, &hess.covariant_hessian, k)?;
    }

    let profile = frame.profile();
    let ck = symfun::newton_trace_coefficient(n, k);
    let c = chart.space().curvature_sign();
    let closed = &frame.normal * (ck * profile.h_ext(k + 1)) - &frame.position * (c * ck * profile.h(k));
    Ok(DualVector::new(generic, closed))
}

/// `L_k` applied to every ambient coordinate of the Gauss map, along both
/// routes. The generic route differentiates the unit normal numerically;
/// the closed form needs the gradient of `H_{k+1}`, also taken numerically.
pub fn lk_gauss(chart: &Chart, frame: &FrameData, k: usize) -> Result<DualVector> {
    check_order(frame, k)?;
    let n = frame.dim();
    let d = chart.space().ambient_dim();
    let u = &frame.u;

    let gauss = |v: &[f64]| -> Result<DVector<f64>> { chart.gauss_map(v) };
    let (partials, hessians) =
        numdiff::partials_and_hessians(&gauss, u, d, numdiff::second_step(u))?;
    let mut generic = DVector::zeros(d);
    for comp in 0..d {
        let mut cov = hessians[comp].clone();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    cov[(i, j)] -= frame.christoffel[l][(i, j)] * partials[(comp, l)];
                }
            }
        }
        generic[comp] = lk_from_hessian(frame, &cov, k)?;
    }

    let profile = frame.profile();
    let c = chart.space().curvature_sign();
    let bnk1 = symfun::binomial(n, k + 1);
    let (_, grad_hk1) = curvature_gradient(chart, frame, k + 1)?;
    let normal_coef = -bnk1
        * (n as f64 * profile.h(1) * profile.h_ext(k + 1)
            - (n as f64 - k as f64 - 1.0) * profile.h_ext(k + 2));
    let position_coef = c * (k as f64 + 1.0) * bnk1 * profile.h_ext(k + 1);
    let closed = grad_hk1 * (-bnk1) + &frame.normal * normal_coef + &frame.position * position_coef;
    Ok(DualVector::new(generic, closed))
}

/// Check of the scalar relation `L_k H_k = H_{k+1} <b,N> − c H_k <b,x>`,
/// valid when the tangent part of `b` equals `c_k ∇H_k`.
#[derive(Debug, Clone)]
pub struct HkRelationCheck {
    /// `L_k H_k` through the generic machinery.
    pub lhs: f64,
    /// `H_{k+1} <b,N> − c H_k <b,x>`.
    pub rhs: f64,
    /// `|lhs − rhs| / (1 + |rhs|)`.
    pub residual: f64,
    /// `‖b^tan − c_k ∇H_k‖`, how well `b` satisfies the hypothesis.
    pub hypothesis_defect: f64,
}

/// Evaluate both sides of the `L_k H_k` relation for a given constant `b`.
pub fn lk_hk_relation(
    chart: &Chart,
    frame: &FrameData,
    k: usize,
    b: &DVector<f64>,
) -> Result<HkRelationCheck> {
    check_order(frame, k)?;
    let n = frame.dim();
    if b.len() != chart.space().ambient_dim() {
        return Err(Error::BadShape {
            rows: b.len(),
            cols: 1,
            expected: chart.space().ambient_dim(),
        });
    }
    let field_fn = |v: &[f64]| -> Result<f64> { Ok(chart.frame(v)?.profile().h(k)) };
    let lhs = lk_scalar(chart, frame, &ScalarField::Chart(&field_fn), k)?;

    let profile = frame.profile();
    let space = chart.space();
    let c = space.curvature_sign();
    let rhs = profile.h_ext(k + 1) * space.inner(b, &frame.normal)
        - c * profile.h(k) * space.inner(b, &frame.position);

    let ck = symfun::newton_trace_coefficient(n, k);
    let (_, grad_hk) = curvature_gradient(chart, frame, k)?;
    let hypothesis_defect = (frame.tangential_projection(b) - grad_hk * ck).norm();

    Ok(HkRelationCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / (1.0 + rhs.abs()),
        hypothesis_defect,
    })
}
